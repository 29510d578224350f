/**
 * Single-feature exploration: a waterfall of bars, one per perturbation
 * level, each spanning from the baseline score to the perturbed score.
 * Bars that land below the threshold are blue, the rest red; a solid black
 * line marks the threshold, a dashed red line the baseline score, and a
 * red circle the perturbation closest to the original feature value.
 */

import type { LocalExplanation } from "../schema.js";
import { escapeXml, formatScore, Margin, scoreToX, svgDocument } from "./scale.js";

export interface WaterfallBar {
  level: number;
  value: number | string;
  score: number;
  delta: number;
  belowThreshold: boolean;
}

export interface WaterfallModel {
  feature: string;
  baselineScore: number;
  baselineLevel: number;
  classChangeScore: number;
  bars: WaterfallBar[];
}

export function buildWaterfallModel(
  payload: LocalExplanation,
  featureName: string,
): WaterfallModel {
  const feature = payload.features.find((f) => f.name === featureName);
  if (!feature) {
    throw new Error(`feature ${featureName} not in explanation payload`);
  }
  return {
    feature: feature.name,
    baselineScore: payload.baseline_score,
    baselineLevel: feature.baseline_level,
    classChangeScore: 0.5,
    bars: feature.perturbations.map((point) => ({
      level: point.level,
      value: point.value,
      score: point.mapped_score,
      delta: point.mapped_score - payload.baseline_score,
      belowThreshold: point.mapped_score < 0.5,
    })),
  };
}

export interface WaterfallRenderOptions {
  width?: number;
  barHeight?: number;
  margin?: Margin;
}

export function renderWaterfall(
  model: WaterfallModel,
  options: WaterfallRenderOptions = {},
): string {
  const width = options.width ?? 760;
  const barHeight = options.barHeight ?? 14;
  const margin = options.margin ?? { top: 28, right: 16, bottom: 28, left: 96 };
  const height = margin.top + model.bars.length * barHeight + margin.bottom;
  const x = (score: number) => scoreToX(score, width, margin);
  const baselineX = x(model.baselineScore);
  const parts: string[] = [];

  let nearest = 0;
  model.bars.forEach((bar, index) => {
    if (
      Math.abs(bar.level - model.baselineLevel) <
      Math.abs((model.bars[nearest]?.level ?? 0) - model.baselineLevel)
    ) {
      nearest = index;
    }
  });

  model.bars.forEach((bar, index) => {
    const y = margin.top + index * barHeight;
    const barX = Math.min(baselineX, x(bar.score));
    const barWidth = Math.abs(x(bar.score) - baselineX);
    const cls = bar.belowThreshold ? "bar below-threshold" : "bar above-threshold";
    const fill = bar.belowThreshold ? "#1f77b4" : "#d62728";
    parts.push(
      `<rect class="${cls}" x="${barX.toFixed(2)}" y="${y + 1}" ` +
        `width="${Math.max(barWidth, 0.5).toFixed(2)}" height="${barHeight - 2}" ` +
        `fill="${fill}" fill-opacity="0.8">` +
        `<title>value=${escapeXml(String(bar.value))} score=${formatScore(bar.score)} ` +
        `delta=${formatScore(bar.delta)}</title></rect>`,
    );
    if (index === nearest) {
      parts.push(
        `<circle class="original-value-marker" cx="${x(bar.score).toFixed(2)}" ` +
          `cy="${y + barHeight / 2}" r="5" fill="#d62728" stroke="#7f0e0e"/>`,
      );
    }
  });

  const chartTop = margin.top - 10;
  const chartBottom = height - margin.bottom + 10;
  parts.push(
    `<line class="class-change-line" x1="${x(model.classChangeScore)}" y1="${chartTop}" ` +
      `x2="${x(model.classChangeScore)}" y2="${chartBottom}" stroke="#000" stroke-width="2"/>`,
  );
  parts.push(
    `<line class="baseline-line" x1="${baselineX.toFixed(2)}" y1="${chartTop}" ` +
      `x2="${baselineX.toFixed(2)}" y2="${chartBottom}" stroke="#d62728" ` +
      `stroke-width="1.5" stroke-dasharray="6 4"/>`,
  );
  parts.push(
    `<text class="chart-title" x="${margin.left}" y="16" font-size="12">` +
      `${escapeXml(model.feature)}: score per perturbed value</text>`,
  );
  return svgDocument(width, height, parts.join(""));
}

/**
 * What-if chart: one horizontal lane per feature (most important on top),
 * a bubble per perturbation level placed at its mapped score, the vertical
 * class-change line at 0.5, a dashed line at the baseline score, and an
 * enlarged marker showing where the original feature value sits.
 */

import type { LocalExplanation, Perturbation } from "../schema.js";
import { escapeXml, formatScore, levelColor, Margin, scoreToX, svgDocument } from "./scale.js";

export interface WhatIfRow {
  name: string;
  rank: number;
  importance: number;
  crossing: boolean;
  baselineLevel: number;
  points: Perturbation[];
}

export interface WhatIfModel {
  baselineScore: number;
  predictedClass: string;
  classChangeScore: number;
  rows: WhatIfRow[];
}

export function buildWhatIfModel(payload: LocalExplanation): WhatIfModel {
  const rows = [...payload.features]
    .sort((a, b) => a.rank - b.rank)
    .map((feature) => ({
      name: feature.name,
      rank: feature.rank,
      importance: feature.I,
      crossing: feature.C >= 1,
      baselineLevel: feature.baseline_level,
      points: feature.perturbations,
    }));
  return {
    baselineScore: payload.baseline_score,
    predictedClass: payload.predicted_class,
    classChangeScore: 0.5,
    rows,
  };
}

export interface WhatIfRenderOptions {
  width?: number;
  rowHeight?: number;
  margin?: Margin;
}

export function renderWhatIf(model: WhatIfModel, options: WhatIfRenderOptions = {}): string {
  const width = options.width ?? 760;
  const rowHeight = options.rowHeight ?? 30;
  const margin = options.margin ?? { top: 24, right: 16, bottom: 28, left: 96 };
  const height = margin.top + model.rows.length * rowHeight + margin.bottom;
  const x = (score: number) => scoreToX(score, width, margin);
  const parts: string[] = [];

  model.rows.forEach((row, index) => {
    const cy = margin.top + index * rowHeight + rowHeight / 2;
    const bubbles = row.points
      .map(
        (point) =>
          `<circle class="bubble" cx="${x(point.mapped_score).toFixed(2)}" cy="${cy}" ` +
          `r="5" fill="${levelColor(point.level)}" fill-opacity="0.75">` +
          `<title>${escapeXml(row.name)} level=${point.level.toFixed(3)} ` +
          `value=${escapeXml(String(point.value))} score=${formatScore(point.mapped_score)}` +
          `</title></circle>`,
      )
      .join("");
    const marker =
      `<circle class="baseline-marker" cx="${x(model.baselineScore).toFixed(2)}" ` +
      `cy="${cy}" r="9" fill="${levelColor(row.baselineLevel)}" stroke="#333" ` +
      `stroke-width="1.5"><title>${escapeXml(row.name)} original value at level ` +
      `${row.baselineLevel.toFixed(3)}</title></circle>`;
    parts.push(
      `<g class="feature-row" data-feature="${escapeXml(row.name)}" ` +
        `data-crossing="${row.crossing ? 1 : 0}">` +
        `<text class="feature-label" x="${margin.left - 8}" y="${cy + 4}" ` +
        `text-anchor="end" font-size="12">${escapeXml(row.name)}</text>` +
        bubbles +
        marker +
        `</g>`,
    );
  });

  const chartTop = margin.top - 8;
  const chartBottom = height - margin.bottom + 8;
  parts.push(
    `<line class="class-change-line" x1="${x(model.classChangeScore)}" ` +
      `y1="${chartTop}" x2="${x(model.classChangeScore)}" y2="${chartBottom}" ` +
      `stroke="#000" stroke-width="1.5"/>`,
  );
  parts.push(
    `<line class="baseline-line" x1="${x(model.baselineScore).toFixed(2)}" ` +
      `y1="${chartTop}" x2="${x(model.baselineScore).toFixed(2)}" y2="${chartBottom}" ` +
      `stroke="#d62728" stroke-width="1.5" stroke-dasharray="6 4"/>`,
  );
  parts.push(
    `<text class="axis-note" x="${x(0.5)}" y="${height - 8}" text-anchor="middle" ` +
      `font-size="11">mapped score (0.5 = class change)</text>`,
  );
  return svgDocument(width, height, parts.join(""));
}

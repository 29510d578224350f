/**
 * Global importance: horizontal bars in strictly descending order. An
 * all-zero vector (no predicted anomalies) renders an empty-state message
 * instead of bars.
 */

import type { GlobalExplanation } from "../schema.js";
import { escapeXml, Margin, svgDocument } from "./scale.js";

export interface GlobalBar {
  name: string;
  value: number;
  share: number;
}

export interface GlobalModel {
  nAnomalies: number;
  bars: GlobalBar[];
  empty: boolean;
}

export function buildGlobalModel(payload: GlobalExplanation): GlobalModel {
  const bars = [...payload.scores]
    .sort((a, b) => b.T - a.T)
    .map((s) => ({ name: s.name, value: s.T, share: s.share }));
  const empty = bars.every((b) => b.value === 0);
  return { nAnomalies: payload.n_anomalies, bars, empty };
}

export interface GlobalRenderOptions {
  width?: number;
  barHeight?: number;
  margin?: Margin;
}

export function renderGlobal(model: GlobalModel, options: GlobalRenderOptions = {}): string {
  const width = options.width ?? 760;
  const barHeight = options.barHeight ?? 24;
  const margin = options.margin ?? { top: 24, right: 60, bottom: 16, left: 96 };

  if (model.empty) {
    return svgDocument(
      width,
      80,
      `<text class="empty-state" x="${width / 2}" y="44" text-anchor="middle" ` +
        `font-size="13">no predicted anomalies in this set - nothing to rank</text>`,
    );
  }

  const height = margin.top + model.bars.length * barHeight + margin.bottom;
  const maxValue = model.bars[0]?.value ?? 1;
  const inner = width - margin.left - margin.right;
  const parts: string[] = [];
  model.bars.forEach((bar, index) => {
    const y = margin.top + index * barHeight;
    const w = maxValue > 0 ? (bar.value / maxValue) * inner : 0;
    parts.push(
      `<g class="global-bar" data-feature="${escapeXml(bar.name)}">` +
        `<text x="${margin.left - 8}" y="${y + barHeight / 2 + 4}" text-anchor="end" ` +
        `font-size="12">${escapeXml(bar.name)}</text>` +
        `<rect x="${margin.left}" y="${y + 3}" width="${w.toFixed(2)}" ` +
        `height="${barHeight - 6}" fill="#1f77b4" fill-opacity="0.85">` +
        `<title>${escapeXml(bar.name)} T=${bar.value.toFixed(4)} ` +
        `share=${(100 * bar.share).toFixed(1)}%</title></rect>` +
        `<text x="${margin.left + w + 6}" y="${y + barHeight / 2 + 4}" font-size="11">` +
        `${(100 * bar.share).toFixed(1)}%</text>` +
        `</g>`,
    );
  });
  parts.push(
    `<text class="chart-title" x="${margin.left}" y="14" font-size="12">` +
      `global importance over ${model.nAnomalies} predicted anomalies</text>`,
  );
  return svgDocument(width, height, parts.join(""));
}

/**
 * Slider weight handling. The four sliders renormalize proportionally so
 * their ratios survive; the server re-validates convexity regardless.
 *
 * reorderByWeights is the one piece of attribution math the UI performs:
 * recombining the payload's sub-scores under new weights to predict the
 * re-ranking while the round trip is in flight (and to cross-check the
 * server's answer).
 */

import type { LocalExplanation, WeightsPayload } from "./schema.js";

export const DEFAULT_WEIGHTS: WeightsPayload = { D: 0.3, C: 0.3, Q: 0.2, R: 0.2 };

export function normalizeWeights(raw: WeightsPayload): WeightsPayload {
  const values = [raw.D, raw.C, raw.Q, raw.R];
  if (values.some((v) => v < 0 || !Number.isFinite(v))) {
    throw new Error(`weights must be finite and non-negative: ${JSON.stringify(raw)}`);
  }
  const total = values.reduce((a, b) => a + b, 0);
  if (total === 0) {
    return { D: 0.25, C: 0.25, Q: 0.25, R: 0.25 };
  }
  return { D: raw.D / total, C: raw.C / total, Q: raw.Q / total, R: raw.R / total };
}

export function importanceUnder(
  feature: { D: number; C: number; Q: number; R: number },
  weights: WeightsPayload,
): number {
  return (
    weights.D * feature.D +
    weights.C * feature.C +
    weights.Q * feature.Q +
    weights.R * feature.R
  );
}

/**
 * Feature names in descending recombined importance. The payload lists
 * features in feature-index order and Array.sort is stable, so ties fall
 * back to ascending feature index exactly like the engine.
 */
export function reorderByWeights(
  payload: LocalExplanation,
  weights: WeightsPayload,
): string[] {
  return payload.features
    .map((feature) => ({ name: feature.name, i: importanceUnder(feature, weights) }))
    .sort((a, b) => b.i - a.i)
    .map((entry) => entry.name);
}

import { describe, expect, it } from "vitest";

import { localExplanationSchema } from "../src/schema.js";
import { DEFAULT_WEIGHTS, normalizeWeights, reorderByWeights } from "../src/weights.js";
import fixture from "./fixtures/local_explanation.json";

describe("normalizeWeights", () => {
  it("renormalizes proportionally to sum 1", () => {
    const w = normalizeWeights({ D: 2, C: 1, Q: 1, R: 0 });
    expect(w.D).toBeCloseTo(0.5, 12);
    expect(w.C).toBeCloseTo(0.25, 12);
    expect(w.Q).toBeCloseTo(0.25, 12);
    expect(w.R).toBe(0);
    expect(w.D + w.C + w.Q + w.R).toBeCloseTo(1, 12);
  });

  it("maps equal sliders to 0.25 each", () => {
    const w = normalizeWeights({ D: 0.6, C: 0.6, Q: 0.6, R: 0.6 });
    expect([w.D, w.C, w.Q, w.R]).toEqual([0.25, 0.25, 0.25, 0.25]);
  });

  it("falls back to uniform when all sliders are zero", () => {
    const w = normalizeWeights({ D: 0, C: 0, Q: 0, R: 0 });
    expect([w.D, w.C, w.Q, w.R]).toEqual([0.25, 0.25, 0.25, 0.25]);
  });

  it("keeps the documented default preset", () => {
    expect(DEFAULT_WEIGHTS).toEqual({ D: 0.3, C: 0.3, Q: 0.2, R: 0.2 });
    expect(normalizeWeights(DEFAULT_WEIGHTS)).toEqual(DEFAULT_WEIGHTS);
  });

  it("rejects negative slider values", () => {
    expect(() => normalizeWeights({ D: -0.1, C: 0.5, Q: 0.3, R: 0.3 })).toThrow();
  });
});

describe("reorderByWeights", () => {
  const payload = localExplanationSchema.parse(fixture);

  it("pure-delta weights order by the D sub-score", () => {
    const order = reorderByWeights(payload, { D: 1, C: 0, Q: 0, R: 0 });
    const deltas = order.map(
      (name) => payload.features.find((f) => f.name === name)!.D,
    );
    const sorted = [...deltas].sort((a, b) => b - a);
    expect(deltas).toEqual(sorted);
  });

  it("reproduces the payload's own ranking under its own weights", () => {
    const order = reorderByWeights(payload, payload.weights);
    const expected = [...payload.features]
      .sort((a, b) => a.rank - b.rank)
      .map((f) => f.name);
    expect(order).toEqual(expected);
  });

  it("breaks ties by feature order", () => {
    const tied = {
      ...payload,
      features: payload.features.map((f) => ({ ...f, D: 0.5, C: 1, Q: 0.5, R: 0.5 })),
    };
    const order = reorderByWeights(tied, { D: 1, C: 0, Q: 0, R: 0 });
    expect(order).toEqual(payload.features.map((f) => f.name));
  });
});

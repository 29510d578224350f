import { describe, expect, it } from "vitest";

import { buildWaterfallModel, renderWaterfall } from "../src/charts/waterfall.js";
import { localExplanationSchema } from "../src/schema.js";
import fixture from "./fixtures/local_explanation.json";

const payload = localExplanationSchema.parse(fixture);
const firstFeature = payload.features[0]!;

function count(haystack: string, needle: string): number {
  return haystack.split(needle).length - 1;
}

describe("waterfall model", () => {
  it("produces one bar per perturbation level", () => {
    const model = buildWaterfallModel(payload, firstFeature.name);
    expect(model.bars).toHaveLength(firstFeature.perturbations.length);
    expect(model.classChangeScore).toBe(0.5);
  });

  it("bars measure the change relative to the baseline score", () => {
    const model = buildWaterfallModel(payload, firstFeature.name);
    for (const [index, bar] of model.bars.entries()) {
      const point = firstFeature.perturbations[index]!;
      expect(bar.delta).toBeCloseTo(point.mapped_score - payload.baseline_score, 12);
      expect(bar.belowThreshold).toBe(point.mapped_score < 0.5);
    }
  });

  it("zero-length bar when the baseline sits on a grid value", () => {
    const flat = {
      ...payload,
      features: payload.features.map((f) =>
        f.name === firstFeature.name
          ? {
              ...f,
              perturbations: f.perturbations.map((p, i) =>
                i === 0 ? { ...p, mapped_score: payload.baseline_score } : p,
              ),
            }
          : f,
      ),
    };
    const model = buildWaterfallModel(flat, firstFeature.name);
    expect(model.bars[0]!.delta).toBe(0);
  });

  it("unknown feature is an error", () => {
    expect(() => buildWaterfallModel(payload, "nope")).toThrow(/not in explanation/);
  });
});

describe("waterfall rendering", () => {
  const model = buildWaterfallModel(payload, firstFeature.name);
  const svg = renderWaterfall(model);

  it("renders every bar", () => {
    expect(count(svg, "<rect")).toBe(firstFeature.perturbations.length);
  });

  it("styles below-threshold bars distinctly", () => {
    const below = model.bars.filter((b) => b.belowThreshold).length;
    expect(count(svg, "below-threshold")).toBe(below);
    expect(count(svg, "above-threshold")).toBe(model.bars.length - below);
  });

  it("draws the solid threshold line, dashed baseline, and value marker", () => {
    expect(svg).toContain('class="class-change-line"');
    expect(svg).toContain('class="baseline-line"');
    expect(count(svg, 'class="original-value-marker"')).toBe(1);
  });

  it("a crossing feature shows bars on both sides of the threshold", () => {
    const crossing = payload.features.find((f) => f.C === 1);
    if (!crossing) return;
    const crossModel = buildWaterfallModel(payload, crossing.name);
    expect(crossModel.bars.some((b) => b.belowThreshold)).toBe(true);
    expect(crossModel.bars.some((b) => !b.belowThreshold)).toBe(true);
  });
});

import { describe, expect, it } from "vitest";

import { buildWhatIfModel, renderWhatIf } from "../src/charts/whatif.js";
import { localExplanationSchema } from "../src/schema.js";
import fixture from "./fixtures/local_explanation.json";

const payload = localExplanationSchema.parse(fixture);

function count(haystack: string, needle: string): number {
  return haystack.split(needle).length - 1;
}

describe("what-if chart model", () => {
  it("orders rows by descending importance", () => {
    const model = buildWhatIfModel(payload);
    expect(model.rows).toHaveLength(payload.features.length);
    const importances = model.rows.map((r) => r.importance);
    expect(importances).toEqual([...importances].sort((a, b) => b - a));
    expect(model.classChangeScore).toBe(0.5);
  });

  it("keeps every perturbation point", () => {
    const model = buildWhatIfModel(payload);
    for (const row of model.rows) {
      expect(row.points.length).toBe(
        payload.features.find((f) => f.name === row.name)!.perturbations.length,
      );
    }
  });
});

describe("what-if chart rendering", () => {
  const svg = renderWhatIf(buildWhatIfModel(payload));

  it("renders one lane per feature", () => {
    expect(count(svg, 'class="feature-row"')).toBe(payload.features.length);
  });

  it("renders a bubble per feature and level plus one baseline marker each", () => {
    const totalPoints = payload.features.reduce(
      (acc, f) => acc + f.perturbations.length,
      0,
    );
    expect(count(svg, 'class="bubble"')).toBe(totalPoints);
    expect(count(svg, 'class="baseline-marker"')).toBe(payload.features.length);
  });

  it("draws the 0.5 class-change line and the dashed baseline line", () => {
    expect(svg).toContain('class="class-change-line"');
    expect(svg).toContain('class="baseline-line"');
    expect(svg).toContain("stroke-dasharray");
  });

  it("flags class-crossing features and puts their bubbles on both sides", () => {
    const crossing = payload.features.filter((f) => f.C === 1);
    expect(count(svg, 'data-crossing="1"')).toBe(crossing.length);
    for (const feature of crossing) {
      const scores = feature.perturbations.map((p) => p.mapped_score);
      expect(Math.max(...scores)).toBeGreaterThanOrEqual(0.5);
      expect(Math.min(...scores)).toBeLessThan(0.5);
    }
  });

  it("renders a single-feature payload as one row", () => {
    const single = {
      ...payload,
      features: [{ ...payload.features[0]!, rank: 1 }],
    };
    const svgSingle = renderWhatIf(buildWhatIfModel(single));
    expect(count(svgSingle, 'class="feature-row"')).toBe(1);
  });

  it("collapses all bubbles onto the baseline line when scores equal it", () => {
    const flat = {
      ...payload,
      baseline_score: 0.4,
      features: payload.features.map((f) => ({
        ...f,
        perturbations: f.perturbations.map((p) => ({ ...p, mapped_score: 0.4 })),
      })),
    };
    const svgFlat = renderWhatIf(buildWhatIfModel(flat));
    const baselineX = /class="baseline-line" x1="([\d.]+)"/.exec(svgFlat)?.[1];
    expect(baselineX).toBeDefined();
    const bubbleXs = [...svgFlat.matchAll(/class="bubble" cx="([\d.]+)"/g)].map(
      (m) => m[1],
    );
    expect(bubbleXs.length).toBeGreaterThan(0);
    for (const cx of bubbleXs) {
      expect(Number(cx)).toBeCloseTo(Number(baselineX), 6);
    }
  });

  it("rejects schema-violating payloads before any rendering", () => {
    const broken = { ...fixture, features: [] };
    expect(() => localExplanationSchema.parse(broken)).toThrow();
  });
});

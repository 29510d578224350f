/**
 * Weight-exploration exactness: the UI's client-side re-ranking must agree
 * with from-scratch CLI runs for the same weight vectors. The fixture file
 * pins the CLI's rankings for 20 random weight vectors over one payload.
 */

import { describe, expect, it } from "vitest";

import { localExplanationSchema, weightsSchema } from "../src/schema.js";
import { reorderByWeights } from "../src/weights.js";
import payloadFixture from "./fixtures/local_explanation.json";
import rankingFixture from "./fixtures/weight_rankings.json";

describe("weight exploration contract", () => {
  const payload = localExplanationSchema.parse(payloadFixture);

  it("covers 20 weight vectors", () => {
    expect(rankingFixture).toHaveLength(20);
  });

  it.each(rankingFixture.map((entry, index) => [index, entry] as const))(
    "vector %i matches the CLI ranking",
    (_index, entry) => {
      const weights = weightsSchema.parse(entry.weights);
      expect(reorderByWeights(payload, weights)).toEqual(entry.ranking);
    },
  );
});

/**
 * Zod schemas for the service payloads. Every number shown in the UI must
 * trace back to a field validated here; a schema mismatch aborts the render
 * and surfaces in the error panel instead of a partial chart.
 */

import { z } from "zod";

export const perturbationSchema = z.object({
  level: z.number().min(0).max(1),
  value: z.union([z.number(), z.string()]),
  mapped_score: z.number().min(0).max(1),
});

export const featureSchema = z.object({
  name: z.string(),
  D: z.number().min(0).max(1),
  R: z.number().min(0).max(1),
  C: z.number().min(0).max(1),
  Q: z.number().min(0).max(1),
  I: z.number().min(0).max(1),
  rank: z.number().int().min(1),
  baseline_level: z.number().min(0).max(1),
  perturbations: z.array(perturbationSchema).min(1),
});

export const weightsSchema = z.object({
  D: z.number().min(0),
  C: z.number().min(0),
  Q: z.number().min(0),
  R: z.number().min(0),
});

export const localExplanationSchema = z.object({
  baseline_score: z.number().min(0).max(1),
  predicted_class: z.string(),
  weights: weightsSchema,
  features: z.array(featureSchema).min(1),
});

export const globalExplanationSchema = z.object({
  n_anomalies: z.number().int().min(0),
  scores: z.array(
    z.object({
      name: z.string(),
      T: z.number().min(0),
      share: z.number().min(0).max(1),
    }),
  ),
});

export const explainResponseSchema = z.object({
  explanation_id: z.string(),
  model_id: z.string(),
  q: z.number().int(),
  cached_rows: z.number().int(),
  explanations: z.array(localExplanationSchema).min(1),
});

export type Perturbation = z.infer<typeof perturbationSchema>;
export type FeaturePayload = z.infer<typeof featureSchema>;
export type WeightsPayload = z.infer<typeof weightsSchema>;
export type LocalExplanation = z.infer<typeof localExplanationSchema>;
export type GlobalExplanation = z.infer<typeof globalExplanationSchema>;
export type ExplainResponse = z.infer<typeof explainResponseSchema>;

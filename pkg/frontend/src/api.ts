/** Typed client for the explanation service. */

import {
  ExplainResponse,
  explainResponseSchema,
  GlobalExplanation,
  globalExplanationSchema,
} from "./schema.js";
import type { WeightsPayload } from "./schema.js";

export class ServiceError extends Error {
  constructor(
    public code: number,
    message: string,
  ) {
    super(message);
  }
}

export interface DatasetProfile {
  dataset_id: string;
  n_rows: number;
  n_features: number;
  feature_names: string[];
  column_kinds: string[];
  rejected_rows: number;
  has_labels: boolean;
  q: number;
}

export interface ModelInfo {
  model_id: string;
  dataset_id: string;
  threshold: number;
  params: Record<string, number>;
  metrics: { precision: number; recall: number; f1: number } | null;
}

export interface ScoredRow {
  row: number;
  score: number;
  mapped_score: number;
  predicted_class: string;
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (error) {
    throw new ServiceError(0, `service unreachable: ${String(error)}`);
  }
  const body = await response.json().catch(() => null);
  if (!response.ok) {
    const message =
      body && typeof body.message === "string" ? body.message : response.statusText;
    throw new ServiceError(response.status, message);
  }
  return body as T;
}

export class ServiceClient {
  constructor(public baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, "")}${path}`;
  }

  uploadDataset(csv: string, q = 70): Promise<DatasetProfile> {
    return request(this.url(`/datasets?q=${q}`), {
      method: "POST",
      headers: { "content-type": "text/csv" },
      body: csv,
    });
  }

  trainModel(params: {
    dataset_id: string;
    n_trees?: number;
    psi?: number;
    seed?: number;
    contamination?: number | null;
  }): Promise<ModelInfo> {
    return request(this.url("/models"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(params),
    });
  }

  modelScores(modelId: string): Promise<{ model_id: string; rows: ScoredRow[] }> {
    return request(this.url(`/models/${modelId}/scores`));
  }

  async explain(params: {
    model_id: string;
    row?: number;
    rows?: number[];
    point?: Array<number | string>;
    weights?: WeightsPayload;
    q?: number;
  }): Promise<ExplainResponse> {
    const raw = await request<unknown>(this.url("/explanations"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(params),
    });
    return explainResponseSchema.parse(raw);
  }

  async modelGlobal(modelId: string): Promise<GlobalExplanation> {
    const raw = await request<unknown>(this.url(`/models/${modelId}/global`));
    return globalExplanationSchema.parse(raw);
  }

  async batchGlobal(explanationId: string): Promise<GlobalExplanation> {
    const raw = await request<unknown>(this.url(`/explanations/${explanationId}/global`));
    return globalExplanationSchema.parse(raw);
  }
}

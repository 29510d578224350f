/**
 * Workbench controller: dataset upload, model training, sample picking,
 * live weight sliders, and the three linked views. All numbers shown come
 * from validated service payloads; the only client-side math is the
 * proportional slider renormalization and the weight re-ranking preview.
 */

import { ServiceClient, ServiceError } from "./api.js";
import { buildGlobalModel, renderGlobal } from "./charts/global.js";
import { buildWaterfallModel, renderWaterfall } from "./charts/waterfall.js";
import { buildWhatIfModel, renderWhatIf } from "./charts/whatif.js";
import type { LocalExplanation, WeightsPayload } from "./schema.js";
import { DEFAULT_WEIGHTS, normalizeWeights } from "./weights.js";

const WEIGHT_KEYS: Array<keyof WeightsPayload> = ["D", "C", "Q", "R"];

function debounce<A extends unknown[]>(fn: (...args: A) => void, ms: number) {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    clearTimeout(timer);
    timer = setTimeout(() => fn(...args), ms);
  };
}

export class Workbench {
  private client: ServiceClient;
  private datasetId: string | null = null;
  private modelId: string | null = null;
  private selectedRow: number | null = null;
  private selectedFeature: string | null = null;
  private currentExplanation: LocalExplanation | null = null;
  private readonly requestExplanation: () => void;

  constructor(
    private root: Document,
    baseUrl: string,
  ) {
    this.client = new ServiceClient(baseUrl);
    this.requestExplanation = debounce(() => void this.refreshExplanation(), 150);
    this.bind();
  }

  private element<T extends HTMLElement>(id: string): T {
    const node = this.root.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node as T;
  }

  private setError(message: string | null): void {
    const panel = this.element<HTMLDivElement>("error-panel");
    panel.textContent = message ?? "";
    panel.style.display = message ? "block" : "none";
  }

  private setStatus(message: string): void {
    this.element<HTMLDivElement>("status").textContent = message;
  }

  private bind(): void {
    this.element<HTMLButtonElement>("upload-btn").addEventListener("click", () =>
      void this.upload(),
    );
    this.element<HTMLButtonElement>("train-btn").addEventListener("click", () =>
      void this.train(),
    );
    this.element<HTMLSelectElement>("sample-select").addEventListener("change", (ev) => {
      this.selectedRow = Number((ev.target as HTMLSelectElement).value);
      this.requestExplanation();
    });
    this.element<HTMLSelectElement>("feature-select").addEventListener("change", (ev) => {
      this.selectedFeature = (ev.target as HTMLSelectElement).value;
      this.renderAll();
    });
    for (const key of WEIGHT_KEYS) {
      this.element<HTMLInputElement>(`weight-${key}`).addEventListener("input", () => {
        this.showWeights(this.sliderWeights());
        this.requestExplanation();
      });
    }
    this.element<HTMLButtonElement>("weights-reset").addEventListener("click", () => {
      this.applyWeights(DEFAULT_WEIGHTS);
      this.requestExplanation();
    });
    this.showWeights(DEFAULT_WEIGHTS);
  }

  private sliderWeights(): WeightsPayload {
    const raw = Object.fromEntries(
      WEIGHT_KEYS.map((key) => [
        key,
        Number(this.element<HTMLInputElement>(`weight-${key}`).value),
      ]),
    ) as unknown as WeightsPayload;
    return normalizeWeights(raw);
  }

  private applyWeights(weights: WeightsPayload): void {
    for (const key of WEIGHT_KEYS) {
      this.element<HTMLInputElement>(`weight-${key}`).value = String(weights[key]);
    }
    this.showWeights(weights);
  }

  private showWeights(weights: WeightsPayload): void {
    this.element<HTMLSpanElement>("weights-view").textContent = WEIGHT_KEYS.map(
      (key) => `${key}=${weights[key].toFixed(3)}`,
    ).join("  ");
  }

  private async upload(): Promise<void> {
    this.setError(null);
    const input = this.element<HTMLInputElement>("csv-file");
    const file = input.files?.[0];
    if (!file) {
      this.setError("choose a CSV file first");
      return;
    }
    try {
      const q = Number(this.element<HTMLInputElement>("grid-q").value) || 70;
      const profile = await this.client.uploadDataset(await file.text(), q);
      this.datasetId = profile.dataset_id;
      this.setStatus(
        `dataset ${profile.dataset_id}: ${profile.n_rows} rows x ` +
          `${profile.n_features} features (Q=${profile.q})`,
      );
    } catch (error) {
      this.fail(error);
    }
  }

  private async train(): Promise<void> {
    this.setError(null);
    if (!this.datasetId) {
      this.setError("upload a dataset first");
      return;
    }
    try {
      const model = await this.client.trainModel({
        dataset_id: this.datasetId,
        n_trees: Number(this.element<HTMLInputElement>("param-trees").value) || 100,
        psi: Number(this.element<HTMLInputElement>("param-psi").value) || 256,
        seed: Number(this.element<HTMLInputElement>("param-seed").value) || 0,
      });
      this.modelId = model.model_id;
      const f1 = model.metrics ? ` f1=${model.metrics.f1.toFixed(4)}` : "";
      this.setStatus(
        `model ${model.model_id}: threshold=${model.threshold.toFixed(4)}${f1}`,
      );
      await this.populateSamples();
      await this.refreshGlobal();
    } catch (error) {
      this.fail(error);
    }
  }

  private async populateSamples(): Promise<void> {
    if (!this.modelId) return;
    const scores = await this.client.modelScores(this.modelId);
    const select = this.element<HTMLSelectElement>("sample-select");
    select.innerHTML = "";
    const ranked = [...scores.rows].sort((a, b) => b.mapped_score - a.mapped_score);
    for (const row of ranked.slice(0, 200)) {
      const option = this.root.createElement("option");
      option.value = String(row.row);
      option.textContent =
        `row ${row.row} - ${row.predicted_class} ` +
        `(f=${row.mapped_score.toFixed(3)})`;
      select.appendChild(option);
    }
    if (ranked.length > 0 && ranked[0]) {
      this.selectedRow = ranked[0].row;
      select.value = String(ranked[0].row);
      this.requestExplanation();
    }
  }

  private async refreshExplanation(): Promise<void> {
    if (this.modelId === null || this.selectedRow === null) return;
    this.setError(null);
    try {
      const response = await this.client.explain({
        model_id: this.modelId,
        row: this.selectedRow,
        weights: this.sliderWeights(),
      });
      const explanation = response.explanations[0];
      if (!explanation) throw new Error("service returned no explanation");
      this.currentExplanation = explanation;
      if (
        !this.selectedFeature ||
        !explanation.features.some((f) => f.name === this.selectedFeature)
      ) {
        const top = [...explanation.features].sort((a, b) => a.rank - b.rank)[0];
        this.selectedFeature = top ? top.name : null;
      }
      this.populateFeaturePicker(explanation);
      this.renderAll();
    } catch (error) {
      this.fail(error);
    }
  }

  private populateFeaturePicker(explanation: LocalExplanation): void {
    const select = this.element<HTMLSelectElement>("feature-select");
    select.innerHTML = "";
    for (const feature of [...explanation.features].sort((a, b) => a.rank - b.rank)) {
      const option = this.root.createElement("option");
      option.value = feature.name;
      option.textContent = `${feature.name} (I=${feature.I.toFixed(3)})`;
      select.appendChild(option);
    }
    if (this.selectedFeature) select.value = this.selectedFeature;
  }

  private renderAll(): void {
    const explanation = this.currentExplanation;
    if (!explanation) return;
    this.element<HTMLDivElement>("whatif").innerHTML = renderWhatIf(
      buildWhatIfModel(explanation),
    );
    if (this.selectedFeature) {
      this.element<HTMLDivElement>("waterfall").innerHTML = renderWaterfall(
        buildWaterfallModel(explanation, this.selectedFeature),
      );
    }
    this.element<HTMLSpanElement>("sample-class").textContent =
      `predicted ${explanation.predicted_class} ` +
      `(f=${explanation.baseline_score.toFixed(4)})`;
  }

  private async refreshGlobal(): Promise<void> {
    if (!this.modelId) return;
    try {
      const payload = await this.client.modelGlobal(this.modelId);
      this.element<HTMLDivElement>("global").innerHTML = renderGlobal(
        buildGlobalModel(payload),
      );
    } catch (error) {
      this.fail(error);
    }
  }

  private fail(error: unknown): void {
    if (error instanceof ServiceError) {
      this.setError(`service error ${error.code}: ${error.message}`);
    } else if (error instanceof Error) {
      this.setError(error.message); // includes schema mismatches, no partial render
    } else {
      this.setError(String(error));
    }
  }
}

"""HTTP facade over the explanation engine.

Thin by construction: datasets, models, and explanation batches live in an
in-memory registry (optionally persisted to disk), and every payload is the
same JSON the CLI writes. Per-row sub-scores are cached keyed by
(model, row, grid resolution) so weight changes re-rank without touching
the scorer - the property that keeps interactive weight sliders cheap.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .bundle import TrainedBundle
from .dataset import QuantileGrid, TabularDataset, build_quantile_grid, load_csv, parse_csv
from .evaluation import f1_score
from .explainer import (
    LocalExplanation,
    Weights,
    aggregate_locals,
    explain_global,
    explain_local,
    reweight,
)
from .iforest import fit_isolation_forest
from .model import CountingScorer, threshold_and_mapper


@dataclass
class _DatasetEntry:
    dataset: TabularDataset
    q: int
    grids: dict[int, QuantileGrid] = field(default_factory=dict)

    def grid(self, q: int) -> QuantileGrid:
        if q not in self.grids:
            self.grids[q] = build_quantile_grid(self.dataset, q)
        return self.grids[q]


@dataclass
class _ModelEntry:
    dataset_id: str
    scorer: CountingScorer
    bundle: TrainedBundle
    params: dict
    metrics: dict | None


@dataclass
class _ExplanationBatch:
    model_id: str
    q: int
    row_keys: list
    explanations: list[LocalExplanation]
    weights: Weights


class _Registry:
    """Process-local store. Entries are immutable once registered; the lock
    only guards id allocation and dict mutation."""

    def __init__(self) -> None:
        self.lock = threading.Lock()
        self.datasets: dict[str, _DatasetEntry] = {}
        self.models: dict[str, _ModelEntry] = {}
        self.batches: dict[str, _ExplanationBatch] = {}
        self.subscore_cache: dict[tuple, LocalExplanation] = {}
        self._counters = {"ds": 0, "m": 0, "ex": 0}

    def next_id(self, prefix: str) -> str:
        with self.lock:
            self._counters[prefix] += 1
            return f"{prefix}-{self._counters[prefix]}"


class ModelRequest(BaseModel):
    dataset_id: str
    n_trees: int = 100
    psi: int = 256
    seed: int = 0
    contamination: float | None = None


class ExplainRequest(BaseModel):
    model_id: str
    row: int | None = None
    rows: list[int] | None = None
    point: list[Any] | None = None
    weights: dict[str, float] | None = None
    q: int | None = None


def _error_payload(code: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=code, content={"code": code, "message": message})


def _parse_weights(raw: dict[str, float] | None) -> Weights:
    if raw is None:
        return Weights()
    try:
        return Weights.from_payload(raw)
    except (KeyError, TypeError) as exc:
        raise HTTPException(422, f"weights need keys D, C, Q, R: {exc}") from exc
    except ValueError as exc:
        raise HTTPException(422, f"invalid convex weights: {exc}") from exc


def _resolve_contamination(explicit: float | None, data: TabularDataset) -> float:
    if explicit is not None:
        if not 0.0 < explicit < 1.0:
            raise HTTPException(400, "contamination must lie in (0, 1)")
        return explicit
    if data.labels is not None and 0 < int(data.labels.sum()) < data.n_rows:
        return float(data.labels.mean())
    return 0.10


def create_app(persist_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="acme-ad service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    registry = _Registry()
    app.state.registry = registry
    persist_path = Path(persist_dir) if persist_dir else None

    @app.exception_handler(HTTPException)
    async def _http_error(_request: Request, exc: HTTPException):
        return _error_payload(exc.status_code, str(exc.detail))

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request: Request, exc: RequestValidationError):
        return _error_payload(422, str(exc.errors()))

    def _dataset(dataset_id: str) -> _DatasetEntry:
        entry = registry.datasets.get(dataset_id)
        if entry is None:
            raise HTTPException(404, f"unknown dataset {dataset_id!r}")
        return entry

    def _model(model_id: str) -> _ModelEntry:
        entry = registry.models.get(model_id)
        if entry is None:
            raise HTTPException(404, f"unknown model {model_id!r}")
        return entry

    def _dataset_profile(dataset_id: str, entry: _DatasetEntry) -> dict:
        data = entry.dataset
        return {
            "dataset_id": dataset_id,
            "n_rows": data.n_rows,
            "n_features": data.n_features,
            "feature_names": list(data.feature_names),
            "column_kinds": list(data.column_kinds),
            "rejected_rows": data.rejected_rows,
            "has_labels": data.labels is not None,
            "q": entry.q,
        }

    def _register_dataset(data: TabularDataset, q: int, persist_source: str | None) -> str:
        dataset_id = registry.next_id("ds")
        entry = _DatasetEntry(dataset=data, q=q)
        entry.grid(q)
        registry.datasets[dataset_id] = entry
        if persist_path is not None and persist_source is not None:
            target = persist_path / "datasets"
            target.mkdir(parents=True, exist_ok=True)
            (target / f"{dataset_id}.csv").write_text(persist_source, encoding="utf-8")
            (target / f"{dataset_id}.meta.json").write_text(
                json.dumps({"q": q, "label_column": "label" if data.labels is not None else None}),
                encoding="utf-8",
            )
        return dataset_id

    @app.post("/datasets")
    async def upload_dataset(
        request: Request,
        q: int = Query(default=70, ge=2),
        label_column: str | None = Query(default=None),
    ):
        body = (await request.body()).decode("utf-8", errors="replace")
        if not body.strip():
            raise HTTPException(400, "empty dataset upload")
        if label_column is None:
            header = [h.strip() for h in body.splitlines()[0].split(",")]
            label_column = "label" if "label" in header else None
        try:
            data = parse_csv(body, label_column=label_column, source="<upload>")
        except ValueError as exc:
            raise HTTPException(400, str(exc)) from exc
        dataset_id = _register_dataset(data, q, persist_source=body)
        return _dataset_profile(dataset_id, registry.datasets[dataset_id])

    @app.post("/models")
    def train_model(request: ModelRequest):
        entry = _dataset(request.dataset_id)
        data = entry.dataset
        if not data.is_numeric:
            raise HTTPException(400, "model training needs numeric-only features")
        if request.psi < 2:
            raise HTTPException(400, f"psi must be >= 2, got {request.psi}")
        if request.n_trees < 1:
            raise HTTPException(400, f"n_trees must be >= 1, got {request.n_trees}")
        contamination = _resolve_contamination(request.contamination, data)
        model = fit_isolation_forest(
            data, n_trees=request.n_trees, psi=request.psi, seed=request.seed
        )
        scores = model.score_batch(data.matrix())
        try:
            mapper = threshold_and_mapper(scores, contamination)
        except ValueError as exc:
            raise HTTPException(400, str(exc)) from exc
        model.threshold = mapper.threshold

        metrics = None
        if data.labels is not None:
            predicted = (scores > mapper.threshold).astype(np.int64)
            precision, recall, f1 = f1_score(predicted, data.labels)
            metrics = {"precision": precision, "recall": recall, "f1": f1}

        reference = TabularDataset(
            feature_names=data.feature_names,
            column_kinds=data.column_kinds,
            columns=data.columns,
        )
        bundle = TrainedBundle(model=model, mapper=mapper, reference=reference)
        model_id = registry.next_id("m")
        params = {
            "n_trees": request.n_trees,
            "psi": request.psi,
            "seed": request.seed,
            "contamination": contamination,
        }
        registry.models[model_id] = _ModelEntry(
            dataset_id=request.dataset_id,
            scorer=CountingScorer(model),
            bundle=bundle,
            params=params,
            metrics=metrics,
        )
        if persist_path is not None:
            target = persist_path / "models"
            target.mkdir(parents=True, exist_ok=True)
            bundle.save(target / f"{model_id}.bundle.json")
            (target / f"{model_id}.meta.json").write_text(
                json.dumps({"dataset_id": request.dataset_id, "params": params,
                            "metrics": metrics}),
                encoding="utf-8",
            )
        return {
            "model_id": model_id,
            "dataset_id": request.dataset_id,
            "threshold": mapper.threshold,
            "params": params,
            "metrics": metrics,
        }

    @app.get("/datasets/{dataset_id}")
    def dataset_profile(dataset_id: str):
        return _dataset_profile(dataset_id, _dataset(dataset_id))

    @app.get("/datasets/{dataset_id}/grid")
    def dataset_grid(dataset_id: str, q: int | None = Query(default=None, ge=2)):
        entry = _dataset(dataset_id)
        return entry.grid(q or entry.q).to_payload()

    @app.get("/models/{model_id}")
    def model_info(model_id: str):
        entry = _model(model_id)
        return {
            "model_id": model_id,
            "dataset_id": entry.dataset_id,
            "threshold": entry.bundle.mapper.threshold,
            "params": entry.params,
            "metrics": entry.metrics,
            "scorer_calls": entry.scorer.calls,
        }

    @app.get("/models/{model_id}/scores")
    def model_scores(model_id: str):
        entry = _model(model_id)
        data = _dataset(entry.dataset_id).dataset
        raw = entry.scorer.score_batch(data.matrix())
        mapped = entry.bundle.mapper.map_batch(raw)
        return {
            "model_id": model_id,
            "rows": [
                {
                    "row": i,
                    "score": float(raw[i]),
                    "mapped_score": float(mapped[i]),
                    "predicted_class": "anomalous" if raw[i] > entry.bundle.mapper.threshold
                    else "normal",
                }
                for i in range(data.n_rows)
            ],
        }

    def _explain_cached(
        entry: _ModelEntry, model_id: str, q: int, row_key: tuple, point, weights: Weights
    ) -> tuple[LocalExplanation, bool]:
        cache_key = (model_id, q, row_key)
        cached = registry.subscore_cache.get(cache_key)
        if cached is not None:
            return reweight(cached, weights), True
        grid = _dataset(entry.dataset_id).grid(q)
        exp = explain_local(entry.scorer, entry.bundle.mapper, grid, point, weights)
        registry.subscore_cache[cache_key] = exp
        return exp, False

    @app.post("/explanations")
    def create_explanations(request: ExplainRequest):
        entry = _model(request.model_id)
        weights = _parse_weights(request.weights)
        dataset_entry = _dataset(entry.dataset_id)
        data = dataset_entry.dataset
        q = request.q or dataset_entry.q
        if q < 2:
            raise HTTPException(400, f"q must be >= 2, got {q}")

        selectors = [s for s in (request.row, request.rows, request.point) if s is not None]
        if len(selectors) != 1:
            raise HTTPException(400, "select exactly one of row / rows / point")

        row_keys: list = []
        points: list = []
        if request.point is not None:
            if len(request.point) != data.n_features:
                raise HTTPException(
                    400,
                    f"point has {len(request.point)} features, expected {data.n_features}",
                )
            row_keys.append(("point", tuple(request.point)))
            points.append(request.point)
        else:
            indices = [request.row] if request.row is not None else list(request.rows)
            bad = [i for i in indices if not 0 <= i < data.n_rows]
            if bad:
                raise HTTPException(400, f"row selector out of range: {bad} (N={data.n_rows})")
            for i in indices:
                row_keys.append(("row", int(i)))
                points.append(data.row(int(i)))

        explanations = []
        cache_hits = 0
        for row_key, point in zip(row_keys, points):
            exp, was_cached = _explain_cached(
                entry, request.model_id, q, row_key, point, weights
            )
            cache_hits += was_cached
            explanations.append(exp)

        batch_id = registry.next_id("ex")
        registry.batches[batch_id] = _ExplanationBatch(
            model_id=request.model_id,
            q=q,
            row_keys=row_keys,
            explanations=explanations,
            weights=weights,
        )
        return {
            "explanation_id": batch_id,
            "model_id": request.model_id,
            "q": q,
            "cached_rows": cache_hits,
            "explanations": [exp.to_payload() for exp in explanations],
        }

    @app.get("/explanations/{batch_id}")
    def get_explanations(batch_id: str):
        batch = registry.batches.get(batch_id)
        if batch is None:
            raise HTTPException(404, f"unknown explanation {batch_id!r}")
        return {
            "explanation_id": batch_id,
            "model_id": batch.model_id,
            "q": batch.q,
            "explanations": [exp.to_payload() for exp in batch.explanations],
        }

    @app.get("/explanations/{batch_id}/global")
    def batch_global(batch_id: str):
        batch = registry.batches.get(batch_id)
        if batch is None:
            raise HTTPException(404, f"unknown explanation {batch_id!r}")
        feature_names = batch.explanations[0].feature_names if batch.explanations else ()
        if not feature_names:
            model_entry = _model(batch.model_id)
            feature_names = model_entry.bundle.reference.feature_names
        return aggregate_locals(batch.explanations, feature_names).to_payload()

    @app.get("/models/{model_id}/global")
    def model_global(
        model_id: str,
        q: int | None = Query(default=None, ge=2),
        w_d: float | None = Query(default=None),
        w_c: float | None = Query(default=None),
        w_q: float | None = Query(default=None),
        w_r: float | None = Query(default=None),
    ):
        entry = _model(model_id)
        dataset_entry = _dataset(entry.dataset_id)
        data = dataset_entry.dataset
        weight_values = (w_d, w_c, w_q, w_r)
        if any(v is not None for v in weight_values):
            if any(v is None for v in weight_values):
                raise HTTPException(422, "provide all of w_d, w_c, w_q, w_r or none")
            weights = _parse_weights({"D": w_d, "C": w_c, "Q": w_q, "R": w_r})
        else:
            weights = Weights()
        grid = dataset_entry.grid(q or dataset_entry.q)
        rows = [data.row(i) for i in range(data.n_rows)]
        return explain_global(
            entry.scorer, entry.bundle.mapper, grid, rows, weights
        ).to_payload()

    if persist_path is not None:
        _restore(registry, persist_path)
    return app


def _restore(registry: _Registry, persist_path: Path) -> None:
    """Reload persisted datasets and models; counters resume past them."""
    datasets_dir = persist_path / "datasets"
    if datasets_dir.is_dir():
        for meta_file in sorted(datasets_dir.glob("ds-*.meta.json")):
            dataset_id = meta_file.name[: -len(".meta.json")]
            meta = json.loads(meta_file.read_text(encoding="utf-8"))
            data = load_csv(
                datasets_dir / f"{dataset_id}.csv", label_column=meta.get("label_column")
            )
            entry = _DatasetEntry(dataset=data, q=meta.get("q", 70))
            registry.datasets[dataset_id] = entry
            registry._counters["ds"] = max(
                registry._counters["ds"], int(dataset_id.split("-")[1])
            )
    models_dir = persist_path / "models"
    if models_dir.is_dir():
        for meta_file in sorted(models_dir.glob("m-*.meta.json")):
            model_id = meta_file.name[: -len(".meta.json")]
            meta = json.loads(meta_file.read_text(encoding="utf-8"))
            bundle = TrainedBundle.load(models_dir / f"{model_id}.bundle.json")
            registry.models[model_id] = _ModelEntry(
                dataset_id=meta["dataset_id"],
                scorer=CountingScorer(bundle.model),
                bundle=bundle,
                params=meta["params"],
                metrics=meta.get("metrics"),
            )
            registry._counters["m"] = max(
                registry._counters["m"], int(model_id.split("-")[1])
            )

"""Quantile-perturbation attribution engine.

For one observation, every feature is swept over its quantile grid while the
others stay fixed; the detector scores each perturbed point and four
sub-scores summarize the sweep:

* delta - spread (max - min) of the mapped scores,
* ratio - where the baseline score sits inside that spread,
* change - whether the sweep straddles the 0.5 class boundary,
* distance - one minus the smallest quantile move that flips the class.

A convex combination of the four gives the local importance used for
ranking; summing local importances over predicted anomalies gives the
global importance.
"""

from __future__ import annotations

import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .dataset import CATEGORICAL, QuantileGrid
from .model import AnomalyScorer, ScoreMapper

_WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Weights:
    """Convex weights of the four sub-scores. Must be non-negative and sum
    to one; defaults favor the score spread and the class-change signal."""

    delta: float = 0.3
    change: float = 0.3
    distance: float = 0.2
    ratio: float = 0.2

    def __post_init__(self) -> None:
        values = (self.delta, self.change, self.distance, self.ratio)
        if not all(v >= 0.0 for v in values):
            raise ValueError(f"weights must be non-negative, got {values}")
        if abs(sum(values) - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError(f"weights must sum to 1, got {sum(values)!r}")

    def to_payload(self) -> dict:
        return {"D": self.delta, "C": self.change, "Q": self.distance, "R": self.ratio}

    @classmethod
    def from_payload(cls, payload: dict) -> "Weights":
        return cls(
            delta=payload["D"],
            change=payload["C"],
            distance=payload["Q"],
            ratio=payload["R"],
        )


DEFAULT_WEIGHTS = Weights()


@dataclass(frozen=True)
class FeatureTrace:
    """Perturbation sweep of one feature: grid levels, substituted values,
    and the mapped score of each perturbed point."""

    levels: np.ndarray
    values: np.ndarray
    scores: np.ndarray
    baseline_level: float


@dataclass(frozen=True)
class LocalExplanation:
    """Per-feature sub-scores, importances, ranking, and the full trace."""

    feature_names: tuple[str, ...]
    baseline_score: float
    predicted_class: str
    weights: Weights
    delta: np.ndarray
    ratio: np.ndarray
    change: np.ndarray
    distance: np.ndarray
    importance: np.ndarray
    ranking: np.ndarray
    traces: tuple[FeatureTrace, ...]

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def rank_positions(self) -> np.ndarray:
        """1-based rank of every feature (rank 1 = most important)."""
        positions = np.empty(self.n_features, dtype=np.int64)
        positions[self.ranking] = np.arange(1, self.n_features + 1)
        return positions

    def to_payload(self) -> dict:
        ranks = self.rank_positions()
        features = []
        for j, name in enumerate(self.feature_names):
            trace = self.traces[j]
            perturbations = [
                {
                    "level": float(level),
                    "value": float(value) if not isinstance(value, str) else value,
                    "mapped_score": float(score),
                }
                for level, value, score in zip(trace.levels, trace.values, trace.scores)
            ]
            features.append(
                {
                    "name": name,
                    "D": float(self.delta[j]),
                    "R": float(self.ratio[j]),
                    "C": int(self.change[j]),
                    "Q": float(self.distance[j]),
                    "I": float(self.importance[j]),
                    "rank": int(ranks[j]),
                    "baseline_level": float(trace.baseline_level),
                    "perturbations": perturbations,
                }
            )
        return {
            "baseline_score": float(self.baseline_score),
            "predicted_class": self.predicted_class,
            "weights": self.weights.to_payload(),
            "features": features,
        }


@dataclass(frozen=True)
class GlobalExplanation:
    """Summed local importances over the points predicted anomalous."""

    feature_names: tuple[str, ...]
    totals: np.ndarray
    n_anomalies: int
    anomaly_indices: tuple[int, ...]

    def shares(self) -> np.ndarray:
        total = float(self.totals.sum())
        if total <= 0.0:
            return np.zeros_like(self.totals)
        return self.totals / total

    def ranking(self) -> np.ndarray:
        """Feature indices in descending total order, ties by index."""
        return np.lexsort((np.arange(len(self.totals)), -self.totals))

    def to_payload(self) -> dict:
        shares = self.shares()
        return {
            "n_anomalies": int(self.n_anomalies),
            "scores": [
                {
                    "name": self.feature_names[j],
                    "T": float(self.totals[j]),
                    "share": float(shares[j]),
                }
                for j in self.ranking()
            ],
        }


def _as_row(x) -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D point, got shape {arr.shape}")
    if arr.dtype.kind in "fiu":
        return arr.astype(np.float64)
    return np.asarray(list(x), dtype=object)


def build_variable_quantile_matrix(x, grid: QuantileGrid, j: int) -> np.ndarray:
    """Rows equal to ``x`` with feature ``j`` swept over its grid values,
    ordered by ascending level."""
    if not 0 <= j < grid.n_features:
        raise IndexError(f"feature index {j} out of range")
    row = _as_row(x)
    if len(row) != grid.n_features:
        raise ValueError(f"point has {len(row)} features, grid has {grid.n_features}")
    g = grid.grids[j]
    rows = np.tile(row, (len(g), 1))
    rows[:, j] = g.values
    return rows


def compute_delta(scores) -> float:
    """Spread of the mapped scores under perturbation (max - min)."""
    s = np.asarray(scores, dtype=np.float64)
    if s.size == 0:
        raise ValueError("no perturbation scores")
    return float(s.max() - s.min())


def compute_ratio(f_x: float, scores) -> float:
    """Normalized position of the baseline score inside the perturbation
    spread, clamped to [0, 1]; zero when the spread is empty."""
    s = np.asarray(scores, dtype=np.float64)
    if s.size == 0:
        raise ValueError("no perturbation scores")
    spread = float(s.max() - s.min())
    if spread == 0.0:
        return 0.0
    return float(min(1.0, max(0.0, (f_x - s.min()) / spread)))


def compute_change(scores) -> int:
    """1 iff the perturbation scores straddle the 0.5 class boundary
    (max >= 0.5 and min < 0.5)."""
    s = np.asarray(scores, dtype=np.float64)
    if s.size == 0:
        raise ValueError("no perturbation scores")
    return int(s.max() >= 0.5 and s.min() < 0.5)


def _flip_mask(f_x: float, scores: np.ndarray) -> np.ndarray:
    """Rows whose mapped score lies on the opposite side of 0.5 from the
    baseline; a baseline exactly at 0.5 accepts flips in either direction."""
    flips = np.zeros(len(scores), dtype=bool)
    if f_x <= 0.5:
        flips |= scores > 0.5
    if f_x >= 0.5:
        flips |= scores < 0.5
    return flips


def compute_distance_to_change(
    levels,
    scores,
    f_x: float,
    baseline_level: float,
    change: int,
) -> float:
    """One minus the smallest |level - baseline_level| over the rows that
    flip the predicted class; zero when no perturbation flips it.

    Ties in the minimal distance resolve to the lowest level (which does not
    affect the returned value, only the preferred flip row).
    """
    if not change:
        return 0.0
    lv = np.asarray(levels, dtype=np.float64)
    sc = np.asarray(scores, dtype=np.float64)
    flips = _flip_mask(f_x, sc)
    if not flips.any():
        return 0.0
    return 1.0 - float(np.abs(lv[flips] - baseline_level).min())


def preferred_flip_row(
    levels,
    scores,
    f_x: float,
    baseline_level: float,
) -> int | None:
    """Index of the class-flipping row closest in level to the baseline,
    lowest level on ties; None when nothing flips."""
    lv = np.asarray(levels, dtype=np.float64)
    sc = np.asarray(scores, dtype=np.float64)
    flips = _flip_mask(f_x, sc)
    if not flips.any():
        return None
    candidates = np.flatnonzero(flips)
    dist = np.abs(lv[candidates] - baseline_level)
    order = np.lexsort((lv[candidates], dist))
    return int(candidates[order[0]])


def compute_local_importance(d: float, r: float, c: float, q: float, weights: Weights) -> float:
    """Convex combination of the four sub-scores."""
    for label, value in (("delta", d), ("ratio", r), ("change", c), ("distance", q)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"sub-score {label} outside [0, 1]: {value}")
    return (
        weights.delta * d
        + weights.change * c
        + weights.distance * q
        + weights.ratio * r
    )


def _rank_descending(values: np.ndarray) -> np.ndarray:
    """Indices sorted by descending value, ties broken by ascending index."""
    return np.lexsort((np.arange(len(values)), -values))


def explain_local(
    model: AnomalyScorer,
    mapper: ScoreMapper,
    grid: QuantileGrid,
    x,
    weights: Weights | None = None,
) -> LocalExplanation:
    """Full perturbation sweep for one observation.

    Scores the baseline once and each grid substitution once, so an
    all-numeric point costs exactly p*Q + 1 scorer evaluations.
    """
    weights = weights or DEFAULT_WEIGHTS
    row = _as_row(x)
    p = grid.n_features
    if len(row) != p:
        raise ValueError(f"point has {len(row)} features, grid has {p}")

    baseline_raw = float(np.asarray(model.score_batch(row.reshape(1, -1)))[0])
    f_x = mapper.map(baseline_raw)

    delta = np.empty(p)
    ratio = np.empty(p)
    change = np.empty(p, dtype=np.int64)
    distance = np.empty(p)
    importance = np.empty(p)
    traces: list[FeatureTrace] = []

    for j in range(p):
        g = grid.grids[j]
        rows = np.tile(row, (len(g), 1))
        rows[:, j] = g.values
        try:
            raw = np.asarray(model.score_batch(rows), dtype=np.float64)
        except Exception as exc:
            raise RuntimeError(
                f"scorer failed while perturbing feature {grid.feature_names[j]!r}"
            ) from exc
        scores = mapper.map_batch(raw)
        baseline_level = grid.level_of(j, row[j])
        trace = FeatureTrace(
            levels=g.levels.copy(),
            values=g.values.copy(),
            scores=scores,
            baseline_level=baseline_level,
        )
        traces.append(trace)

        delta[j] = compute_delta(scores)
        ratio[j] = compute_ratio(f_x, scores)
        change[j] = compute_change(scores)
        distance[j] = compute_distance_to_change(
            g.levels, scores, f_x, baseline_level, change[j]
        )
        importance[j] = compute_local_importance(
            delta[j], ratio[j], change[j], distance[j], weights
        )

    return LocalExplanation(
        feature_names=grid.feature_names,
        baseline_score=f_x,
        predicted_class="anomalous" if f_x > 0.5 else "normal",
        weights=weights,
        delta=delta,
        ratio=ratio,
        change=change,
        distance=distance,
        importance=importance,
        ranking=_rank_descending(importance),
        traces=tuple(traces),
    )


def reweight(explanation: LocalExplanation, weights: Weights) -> LocalExplanation:
    """Recompute importance and ranking under new weights.

    Sub-scores and traces are weight-independent, so this never touches the
    scorer - the shortcut behind interactive weight exploration.
    """
    importance = (
        weights.delta * explanation.delta
        + weights.change * explanation.change
        + weights.distance * explanation.distance
        + weights.ratio * explanation.ratio
    )
    return replace(
        explanation,
        weights=weights,
        importance=importance,
        ranking=_rank_descending(importance),
    )


_WORKER_CTX: dict = {}


def _pool_init(model, mapper, grid, weights) -> None:
    _WORKER_CTX["args"] = (model, mapper, grid, weights)


def _pool_explain(indexed_row) -> LocalExplanation:
    i, row = indexed_row
    model, mapper, grid, weights = _WORKER_CTX["args"]
    try:
        return explain_local(model, mapper, grid, row, weights)
    except Exception as exc:
        raise RuntimeError(f"explanation failed for row {i}") from exc


def explain_rows(
    model: AnomalyScorer,
    mapper: ScoreMapper,
    grid: QuantileGrid,
    rows: Sequence,
    weights: Weights | None = None,
    workers: int = 1,
) -> list[LocalExplanation]:
    """Explain each row independently, optionally fanning out to a process
    pool. Results keep the input order whatever the worker count."""
    rows = list(rows)
    if workers <= 1 or len(rows) < 2:
        out = []
        for i, row in enumerate(rows):
            try:
                out.append(explain_local(model, mapper, grid, row, weights))
            except Exception as exc:
                raise RuntimeError(f"explanation failed for row {i}") from exc
        return out
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(
        max_workers=workers,
        mp_context=ctx,
        initializer=_pool_init,
        initargs=(model, mapper, grid, weights),
    ) as pool:
        chunk = max(1, len(rows) // (4 * workers))
        return list(pool.map(_pool_explain, enumerate(rows), chunksize=chunk))


def explain_global(
    model: AnomalyScorer,
    mapper: ScoreMapper,
    grid: QuantileGrid,
    rows: Sequence,
    weights: Weights | None = None,
    workers: int = 1,
) -> GlobalExplanation:
    """Sum local importances over the rows predicted anomalous (mapped
    baseline score strictly above 0.5). Other rows contribute nothing and
    are never swept."""
    rows = list(rows)
    p = grid.n_features
    totals = np.zeros(p)
    if not rows:
        return GlobalExplanation(grid.feature_names, totals, 0, ())

    raw = np.asarray(model.score_batch(rows), dtype=np.float64)
    mapped = mapper.map_batch(raw)
    anomalous = [i for i in range(len(rows)) if mapped[i] > 0.5]

    explanations = explain_rows(
        model, mapper, grid, [rows[i] for i in anomalous], weights, workers
    )
    for exp in explanations:
        totals += exp.importance
    return GlobalExplanation(
        feature_names=grid.feature_names,
        totals=totals,
        n_anomalies=len(anomalous),
        anomaly_indices=tuple(anomalous),
    )


def aggregate_locals(
    explanations: Sequence[LocalExplanation],
    feature_names: tuple[str, ...],
) -> GlobalExplanation:
    """Global importances from already-computed local explanations: rows
    whose baseline score exceeds 0.5 contribute their importance vector."""
    totals = np.zeros(len(feature_names))
    anomalous = []
    for i, exp in enumerate(explanations):
        if exp.baseline_score > 0.5:
            totals += exp.importance
            anomalous.append(i)
    return GlobalExplanation(
        feature_names=feature_names,
        totals=totals,
        n_anomalies=len(anomalous),
        anomaly_indices=tuple(anomalous),
    )


def rank_distribution(explanations: Sequence[LocalExplanation]) -> np.ndarray:
    """Fraction of explanations placing each feature at each rank position.

    Entry [j, r] is the share of explanations ranking feature j at position
    r (0-based); every position column sums to one.
    """
    explanations = list(explanations)
    if not explanations:
        raise ValueError("no explanations to aggregate")
    p = explanations[0].n_features
    counts = np.zeros((p, p))
    for exp in explanations:
        if exp.n_features != p:
            raise ValueError("explanations disagree on feature count")
        for position, feature in enumerate(exp.ranking):
            counts[feature, position] += 1
    return counts / len(explanations)

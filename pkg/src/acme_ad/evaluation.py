"""Evaluation protocols: detection metrics, rank aggregation across model
instances, the feature-selection proxy task, and throughput measurement.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import TabularDataset
from .explainer import GlobalExplanation, Weights, explain_local
from .iforest import fit_isolation_forest
from .model import CountingScorer, ScoreMapper, threshold_and_mapper

FRACTIONS_DEFAULT = (0.2, 0.4, 0.6, 0.8, 1.0)


def f1_score(predicted, actual) -> tuple[float, float, float]:
    """Precision, recall, and F1 for binary labels with 1 = outlier."""
    pred = np.asarray(predicted, dtype=np.int64)
    true = np.asarray(actual, dtype=np.int64)
    if pred.shape != true.shape:
        raise ValueError(f"label length mismatch: {pred.shape} vs {true.shape}")
    tp = int(np.sum((pred == 1) & (true == 1)))
    fp = int(np.sum((pred == 1) & (true == 0)))
    fn = int(np.sum((pred == 0) & (true == 1)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0.0:
        return precision, recall, 0.0
    return precision, recall, 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class AggregatedRank:
    """Rank-based aggregation of global importances over model instances.

    Each instance contributes 1 - log(rank_j)/log(p) per feature, so its
    top feature adds exactly 1 and its bottom feature exactly 0.
    """

    s_agg: np.ndarray
    n_instances: int
    instance_rankings: tuple[tuple[int, ...], ...]

    def ranking(self) -> np.ndarray:
        """Feature indices by descending aggregate score, ties by index."""
        return np.lexsort((np.arange(len(self.s_agg)), -self.s_agg))


def aggregate_rankings(globals_: Sequence[GlobalExplanation]) -> AggregatedRank:
    """Fold per-instance global rankings into one aggregate score vector."""
    globals_ = list(globals_)
    if not globals_:
        raise ValueError("no global explanations to aggregate")
    p = len(globals_[0].totals)
    if p < 2:
        raise ValueError("rank aggregation needs at least two features")
    s_agg = np.zeros(p)
    rankings = []
    log_p = math.log(p)
    for g in globals_:
        if len(g.totals) != p:
            raise ValueError("instances disagree on feature count")
        order = g.ranking()
        rankings.append(tuple(int(j) for j in order))
        ranks = np.empty(p)
        ranks[order] = np.arange(1, p + 1)
        s_agg += 1.0 - np.log(ranks) / log_p
    return AggregatedRank(
        s_agg=s_agg,
        n_instances=len(globals_),
        instance_rankings=tuple(rankings),
    )


def _column_subset(data: TabularDataset, indices: Sequence[int]) -> TabularDataset:
    return TabularDataset(
        feature_names=tuple(data.feature_names[j] for j in indices),
        column_kinds=tuple(data.column_kinds[j] for j in indices),
        columns=tuple(data.columns[j] for j in indices),
        labels=data.labels,
    )


def _train_and_score_f1(
    data: TabularDataset,
    n_trees: int,
    psi: int,
    contamination: float,
    seed: int,
) -> float:
    model = fit_isolation_forest(data, n_trees=n_trees, psi=psi, seed=seed)
    scores = model.score_batch(data.matrix())
    mapper = threshold_and_mapper(scores, contamination)
    predicted = (scores > mapper.threshold).astype(np.int64)
    return f1_score(predicted, data.labels)[2]


@dataclass(frozen=True)
class FeatureSelectionCurve:
    """Median F1 of guided top-k subsets against fresh random k-subsets."""

    ks: tuple[int, ...]
    selected_sets: tuple[tuple[int, ...], ...]
    guided_median_f1: tuple[float, ...]
    random_median_f1: tuple[float, ...]
    retrains: int

    def to_payload(self, feature_names: Sequence[str]) -> dict:
        return {
            "retrains": self.retrains,
            "curve": [
                {
                    "k": k,
                    "selected": [feature_names[j] for j in sel],
                    "guided_median_f1": g,
                    "random_median_f1": r,
                }
                for k, sel, g, r in zip(
                    self.ks, self.selected_sets, self.guided_median_f1, self.random_median_f1
                )
            ],
        }


def feature_selection_sweep(
    data: TabularDataset,
    ranking: AggregatedRank | Sequence[int],
    retrains: int = 50,
    n_trees: int = 100,
    psi: int = 256,
    contamination: float = 0.10,
    seed: int = 0,
) -> FeatureSelectionCurve:
    """Retrain-and-score curve over nested top-k feature prefixes.

    For every k the detector is retrained ``retrains`` times (fresh seeds)
    on the top-k columns and on a random k-subset drawn fresh per retrain;
    the curve records the median F1 of each arm.
    """
    if data.labels is None:
        raise ValueError("feature selection needs ground-truth labels")
    if retrains < 1:
        raise ValueError("retrains must be >= 1")
    order = ranking.ranking() if isinstance(ranking, AggregatedRank) else np.asarray(ranking)
    p = data.n_features
    if len(order) != p:
        raise ValueError("ranking does not cover every feature")

    rng = np.random.default_rng(seed)
    ks = []
    selected_sets = []
    guided = []
    randomized = []
    for k in range(1, p + 1):
        top_k = [int(j) for j in order[:k]]
        guided_data = _column_subset(data, top_k)
        guided_f1 = []
        random_f1 = []
        for _ in range(retrains):
            model_seed = int(rng.integers(2**63))
            guided_f1.append(
                _train_and_score_f1(guided_data, n_trees, psi, contamination, model_seed)
            )
            random_subset = [int(j) for j in rng.choice(p, size=k, replace=False)]
            random_f1.append(
                _train_and_score_f1(
                    _column_subset(data, random_subset),
                    n_trees,
                    psi,
                    contamination,
                    int(rng.integers(2**63)),
                )
            )
        ks.append(k)
        selected_sets.append(tuple(top_k))
        guided.append(float(np.median(guided_f1)))
        randomized.append(float(np.median(random_f1)))

    return FeatureSelectionCurve(
        ks=tuple(ks),
        selected_sets=tuple(selected_sets),
        guided_median_f1=tuple(guided),
        random_median_f1=tuple(randomized),
        retrains=retrains,
    )


@dataclass(frozen=True)
class ThroughputReport:
    """Wall time and exact scorer-call counts per explained-row fraction."""

    fractions: tuple[float, ...]
    n_rows: tuple[int, ...]
    seconds: tuple[float, ...]
    scorer_calls: tuple[int, ...]
    slope_seconds_per_row: float
    intercept_seconds: float
    r_squared: float

    def to_payload(self) -> dict:
        return {
            "points": [
                {"fraction": f, "n_rows": n, "seconds": s, "scorer_calls": c}
                for f, n, s, c in zip(
                    self.fractions, self.n_rows, self.seconds, self.scorer_calls
                )
            ],
            "slope_seconds_per_row": self.slope_seconds_per_row,
            "intercept_seconds": self.intercept_seconds,
            "r_squared": self.r_squared,
        }


def throughput_benchmark(
    model,
    mapper: ScoreMapper,
    grid,
    rows: Sequence,
    fractions: Sequence[float] = FRACTIONS_DEFAULT,
    weights: Weights | None = None,
) -> ThroughputReport:
    """Explain growing prefixes of ``rows`` and fit time against row count.

    Each fraction runs in isolation with its own counting wrapper, so the
    reported scorer calls are exact per subset. Explanations are produced
    and discarded; a short untimed warmup absorbs first-run effects.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to benchmark")
    for row in rows[: min(5, len(rows))]:
        explain_local(model, mapper, grid, row, weights)

    sizes = []
    seconds = []
    calls = []
    for fraction in fractions:
        if not 0.0 < fraction <= 1.0:
            raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
        m = max(1, round(fraction * len(rows)))
        counting = CountingScorer(model)
        start = time.perf_counter()
        for row in rows[:m]:
            explain_local(counting, mapper, grid, row, weights)
        seconds.append(time.perf_counter() - start)
        sizes.append(m)
        calls.append(counting.calls)

    x = np.asarray(sizes, dtype=np.float64)
    y = np.asarray(seconds, dtype=np.float64)
    if len(x) >= 2 and np.ptp(x) > 0:
        slope, intercept = np.polyfit(x, y, 1)
        residual = y - (slope * x + intercept)
        total = y - y.mean()
        ss_tot = float(np.sum(total**2))
        r2 = 1.0 - float(np.sum(residual**2)) / ss_tot if ss_tot > 0 else 1.0
    else:
        slope, intercept, r2 = 0.0, float(y.mean()), 1.0

    return ThroughputReport(
        fractions=tuple(float(f) for f in fractions),
        n_rows=tuple(sizes),
        seconds=tuple(float(s) for s in seconds),
        scorer_calls=tuple(calls),
        slope_seconds_per_row=float(slope),
        intercept_seconds=float(intercept),
        r_squared=float(r2),
    )

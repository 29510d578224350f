"""End-to-end experiment pipelines.

Each pipeline is a pure function of its configuration (seed included) and
returns a JSON-ready report; the CLI adds file output on top. The
acceptance suite drives these same functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import TabularDataset, build_quantile_grid
from .evaluation import (
    FRACTIONS_DEFAULT,
    aggregate_rankings,
    f1_score,
    feature_selection_sweep,
    throughput_benchmark,
)
from .explainer import Weights, explain_global, explain_rows, rank_distribution
from .iforest import fit_isolation_forest
from .model import threshold_and_mapper
from .synthetic import FAMILIES, SyntheticSpec, generate_test_outliers, generate_training


@dataclass(frozen=True)
class SyntheticRanksConfig:
    p: int = 6
    n_train: int = 1000
    contamination: float = 0.10
    n_trees: int = 100
    psi: int = 256
    quantiles: int = 70
    seed: int = 0
    workers: int = 1


def run_synthetic_ranks(
    config: SyntheticRanksConfig = SyntheticRanksConfig(),
    weights: Weights | None = None,
) -> dict:
    """Ring-data protocol: train, detect the ad-hoc outlier families, explain
    every detected outlier, and report per-family rank distributions."""
    spec = SyntheticSpec(
        p=config.p,
        n_train=config.n_train,
        contamination=config.contamination,
        seed=config.seed,
    )
    train = generate_training(spec)
    families = generate_test_outliers(spec)

    model = fit_isolation_forest(
        train, n_trees=config.n_trees, psi=config.psi, seed=config.seed
    )
    train_scores = model.score_batch(train.matrix())
    mapper = threshold_and_mapper(train_scores, config.contamination)
    grid = build_quantile_grid(train, config.quantiles)

    train_pred = (train_scores > mapper.threshold).astype(np.int64)
    train_precision, train_recall, train_f1 = f1_score(train_pred, train.labels)

    report: dict = {
        "config": {
            "p": config.p,
            "n_train": config.n_train,
            "contamination": config.contamination,
            "n_trees": config.n_trees,
            "psi": config.psi,
            "quantiles": config.quantiles,
            "seed": config.seed,
        },
        "train": {
            "precision": train_precision,
            "recall": train_recall,
            "f1": train_f1,
            "threshold": mapper.threshold,
        },
        "families": {},
    }

    all_pred = []
    all_true = []
    for family in FAMILIES:
        data = families[family]
        scores = model.score_batch(data.matrix())
        detected = np.flatnonzero(scores > mapper.threshold)
        all_pred.append((scores > mapper.threshold).astype(np.int64))
        all_true.append(data.labels)

        explanations = explain_rows(
            model,
            mapper,
            grid,
            [data.row(int(i)) for i in detected],
            weights,
            workers=config.workers,
        )
        entry: dict = {
            "n_points": data.n_rows,
            "n_detected": int(len(detected)),
        }
        if explanations:
            matrix = rank_distribution(explanations)
            entry["rank_matrix"] = matrix.tolist()
            entry["top1_share"] = {
                name: float(matrix[j, 0]) for j, name in enumerate(data.feature_names)
            }
            top2 = matrix[:, 0] + matrix[:, 1]
            entry["top2_share"] = {
                name: float(top2[j]) for j, name in enumerate(data.feature_names)
            }
            # share of detected points whose top-2 ranks are exactly the
            # two ring features, the ground truth for the diagonal family
            lead = sum(
                1
                for exp in explanations
                if set(map(int, exp.ranking[:2])) == {0, 1}
            )
            entry["lead_pair_top2_share"] = lead / len(explanations)
        report["families"][family] = entry

    pred = np.concatenate(all_pred)
    true = np.concatenate(all_true)
    precision, recall, f1 = f1_score(pred, true)
    report["test"] = {"precision": precision, "recall": recall, "f1": f1}
    return report


@dataclass(frozen=True)
class FeatureSelectionConfig:
    n_instances: int = 5
    retrains: int = 50
    n_trees: int = 100
    psi: int = 256
    quantiles: int = 70
    contamination: float = 0.10
    seed: int = 0
    workers: int = 1


def run_feature_selection(
    data: TabularDataset,
    config: FeatureSelectionConfig = FeatureSelectionConfig(),
    weights: Weights | None = None,
) -> dict:
    """Global-rank aggregation over repeated detector instances followed by
    the top-k retraining sweep against random subsets."""
    if data.labels is None:
        raise ValueError("feature selection needs ground-truth labels")
    rng = np.random.default_rng(config.seed)
    rows = [data.row(i) for i in range(data.n_rows)]
    grid = build_quantile_grid(data, config.quantiles)

    globals_ = []
    for _ in range(config.n_instances):
        instance_seed = int(rng.integers(2**63))
        model = fit_isolation_forest(
            data, n_trees=config.n_trees, psi=config.psi, seed=instance_seed
        )
        mapper = threshold_and_mapper(
            model.score_batch(data.matrix()), config.contamination
        )
        globals_.append(
            explain_global(model, mapper, grid, rows, weights, workers=config.workers)
        )

    aggregated = aggregate_rankings(globals_)
    curve = feature_selection_sweep(
        data,
        aggregated,
        retrains=config.retrains,
        n_trees=config.n_trees,
        psi=config.psi,
        contamination=config.contamination,
        seed=int(rng.integers(2**63)),
    )
    order = aggregated.ranking()
    dominated = sum(
        g >= r for g, r in zip(curve.guided_median_f1, curve.random_median_f1)
    )
    return {
        "config": {
            "n_instances": config.n_instances,
            "retrains": config.retrains,
            "n_trees": config.n_trees,
            "psi": config.psi,
            "quantiles": config.quantiles,
            "contamination": config.contamination,
            "seed": config.seed,
        },
        "s_agg": {
            data.feature_names[j]: float(aggregated.s_agg[j]) for j in range(data.n_features)
        },
        "aggregate_ranking": [data.feature_names[int(j)] for j in order],
        "curve": curve.to_payload(data.feature_names),
        "k_values_guided_at_least_random": int(dominated),
    }


@dataclass(frozen=True)
class ThroughputConfig:
    p: int = 36
    n_rows: int = 6435
    contamination: float = 0.10
    n_trees: int = 100
    psi: int = 256
    quantiles: int = 70
    fractions: tuple[float, ...] = FRACTIONS_DEFAULT
    seed: int = 0


def run_throughput(
    config: ThroughputConfig = ThroughputConfig(),
    data: TabularDataset | None = None,
    weights: Weights | None = None,
) -> dict:
    """Scaling benchmark: explain growing fractions of the predicted-anomaly
    set and fit elapsed time against explained-row count."""
    if data is None:
        spec = SyntheticSpec(
            p=config.p,
            n_train=config.n_rows,
            contamination=config.contamination,
            seed=config.seed,
        )
        data = generate_training(spec)
    model = fit_isolation_forest(
        data, n_trees=config.n_trees, psi=config.psi, seed=config.seed
    )
    scores = model.score_batch(data.matrix())
    mapper = threshold_and_mapper(scores, config.contamination)
    grid = build_quantile_grid(data, config.quantiles)

    anomaly_rows = [data.row(int(i)) for i in np.flatnonzero(scores > mapper.threshold)]
    report = throughput_benchmark(
        model, mapper, grid, anomaly_rows, config.fractions, weights
    )
    per_row = data.n_features * config.quantiles + 1
    payload = report.to_payload()
    payload["config"] = {
        "p": data.n_features,
        "n_rows": data.n_rows,
        "n_anomalies": len(anomaly_rows),
        "n_trees": config.n_trees,
        "psi": config.psi,
        "quantiles": config.quantiles,
        "seed": config.seed,
        "expected_calls_per_row": per_row,
    }
    return payload

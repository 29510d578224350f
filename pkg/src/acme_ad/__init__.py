"""Quantile-perturbation explanations for tabular anomaly detectors.

The engine sweeps each feature of an observation over its empirical
quantile grid, scores the perturbed points with any detector exposing a
score-plus-threshold contract, and condenses the sweep into per-feature
importances for local what-if analysis and global rankings.
"""

from ._backend import BACKEND
from .bundle import TrainedBundle
from .dataset import (
    CATEGORICAL,
    NUMERIC,
    QuantileGrid,
    TabularDataset,
    build_quantile_grid,
    load_csv,
    quantile_of,
    write_csv,
)
from .evaluation import (
    AggregatedRank,
    FeatureSelectionCurve,
    ThroughputReport,
    aggregate_rankings,
    f1_score,
    feature_selection_sweep,
    throughput_benchmark,
)
from .explainer import (
    DEFAULT_WEIGHTS,
    GlobalExplanation,
    LocalExplanation,
    Weights,
    build_variable_quantile_matrix,
    compute_change,
    compute_delta,
    compute_distance_to_change,
    compute_local_importance,
    compute_ratio,
    explain_global,
    explain_local,
    explain_rows,
    rank_distribution,
    reweight,
)
from .iforest import IsolationForestModel, fit_isolation_forest
from .model import (
    AnomalyScorer,
    CountingScorer,
    ScoreMapper,
    fit_score_mapper,
    map_score,
    select_threshold,
    threshold_and_mapper,
)
from .synthetic import SyntheticSpec, generate_test_outliers, generate_training

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CATEGORICAL",
    "DEFAULT_WEIGHTS",
    "NUMERIC",
    "AggregatedRank",
    "AnomalyScorer",
    "CountingScorer",
    "FeatureSelectionCurve",
    "GlobalExplanation",
    "IsolationForestModel",
    "LocalExplanation",
    "QuantileGrid",
    "ScoreMapper",
    "SyntheticSpec",
    "TabularDataset",
    "ThroughputReport",
    "TrainedBundle",
    "Weights",
    "aggregate_rankings",
    "build_quantile_grid",
    "build_variable_quantile_matrix",
    "compute_change",
    "compute_delta",
    "compute_distance_to_change",
    "compute_local_importance",
    "compute_ratio",
    "explain_global",
    "explain_local",
    "explain_rows",
    "f1_score",
    "feature_selection_sweep",
    "fit_isolation_forest",
    "fit_score_mapper",
    "generate_test_outliers",
    "generate_training",
    "load_csv",
    "map_score",
    "quantile_of",
    "rank_distribution",
    "reweight",
    "select_threshold",
    "threshold_and_mapper",
    "throughput_benchmark",
    "write_csv",
]

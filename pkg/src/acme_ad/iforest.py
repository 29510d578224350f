"""Isolation forest reference detector.

Trees isolate points by recursive uniform splits on randomly chosen
features; anomalous points end up in shallow leaves. The forest is stored
as flat node arrays so batch scoring runs through the compiled kernel (or
its NumPy fallback) without touching Python objects per node.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._backend import mean_path_length
from .dataset import TabularDataset

_EULER_GAMMA = 0.5772156649015329


def average_path_length(n: int) -> float:
    """Expected unsuccessful-search path length in a BST with n points."""
    if n <= 1:
        return 0.0
    if n == 2:
        return 1.0
    harmonic = math.log(n - 1.0) + _EULER_GAMMA
    return 2.0 * harmonic - 2.0 * (n - 1.0) / n


@dataclass
class IsolationForestModel:
    """Trained forest plus the scoring normalizer.

    Node arrays describe every tree back to back; ``feature[i] < 0`` marks a
    leaf whose ``leaf_value`` is depth + average_path_length(leaf size).
    ``threshold`` is attached after selection and is not used for scoring.
    """

    n_trees: int
    psi: int
    seed: int
    feature_names: tuple[str, ...]
    node_feature: np.ndarray
    node_threshold: np.ndarray
    node_left: np.ndarray
    node_right: np.ndarray
    node_leaf_value: np.ndarray
    tree_roots: np.ndarray
    c_psi: float
    threshold: float | None = None

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def score_batch(self, rows) -> np.ndarray:
        """Anomaly scores in (0, 1) for a matrix or sequence of points."""
        x = np.ascontiguousarray(rows, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(1, -1)
        if x.shape[1] != self.n_features:
            raise ValueError(
                f"expected {self.n_features} features, got {x.shape[1]}"
            )
        depths = mean_path_length(
            self.node_feature,
            self.node_threshold,
            self.node_left,
            self.node_right,
            self.node_leaf_value,
            self.tree_roots,
            x,
        )
        return np.power(2.0, -depths / self.c_psi)

    def score(self, x) -> float:
        return float(self.score_batch([x])[0])

    def to_payload(self) -> dict:
        return {
            "format": "acme-ad-iforest",
            "version": 1,
            "n_trees": self.n_trees,
            "psi": self.psi,
            "seed": self.seed,
            "feature_names": list(self.feature_names),
            "c_psi": self.c_psi,
            "threshold": self.threshold,
            "nodes": {
                "feature": self.node_feature.tolist(),
                "threshold": self.node_threshold.tolist(),
                "left": self.node_left.tolist(),
                "right": self.node_right.tolist(),
                "leaf_value": self.node_leaf_value.tolist(),
            },
            "tree_roots": self.tree_roots.tolist(),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "IsolationForestModel":
        if payload.get("format") != "acme-ad-iforest":
            raise ValueError("not an isolation-forest dump")
        if payload.get("version") != 1:
            raise ValueError(f"unsupported model version {payload.get('version')!r}")
        nodes = payload["nodes"]
        return cls(
            n_trees=payload["n_trees"],
            psi=payload["psi"],
            seed=payload["seed"],
            feature_names=tuple(payload["feature_names"]),
            node_feature=np.asarray(nodes["feature"], dtype=np.int32),
            node_threshold=np.asarray(nodes["threshold"], dtype=np.float64),
            node_left=np.asarray(nodes["left"], dtype=np.int32),
            node_right=np.asarray(nodes["right"], dtype=np.int32),
            node_leaf_value=np.asarray(nodes["leaf_value"], dtype=np.float64),
            tree_roots=np.asarray(payload["tree_roots"], dtype=np.int64),
            c_psi=payload["c_psi"],
            threshold=payload["threshold"],
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_payload(), sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "IsolationForestModel":
        return cls.from_payload(json.loads(Path(path).read_text(encoding="utf-8")))


class _ForestBuilder:
    """Accumulates flattened nodes while trees are grown depth-first."""

    def __init__(self) -> None:
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.leaf_value: list[float] = []

    def add_leaf(self, depth: int, n: int) -> int:
        node_id = len(self.feature)
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.leaf_value.append(depth + average_path_length(n))
        return node_id

    def add_split(self, feature: int, split: float) -> int:
        node_id = len(self.feature)
        self.feature.append(feature)
        self.threshold.append(split)
        self.left.append(-1)
        self.right.append(-1)
        self.leaf_value.append(0.0)
        return node_id


def _grow(
    builder: _ForestBuilder,
    x: np.ndarray,
    idx: np.ndarray,
    depth: int,
    height_limit: int,
    rng: np.random.Generator,
) -> int:
    n = len(idx)
    if depth >= height_limit or n <= 1:
        return builder.add_leaf(depth, n)
    f = int(rng.integers(x.shape[1]))
    col = x[idx, f]
    lo = float(col.min())
    hi = float(col.max())
    if lo == hi:  # empty split range terminates the branch
        return builder.add_leaf(depth, n)
    split = float(rng.uniform(lo, hi))
    node_id = builder.add_split(f, split)
    mask = col < split
    builder.left[node_id] = _grow(builder, x, idx[mask], depth + 1, height_limit, rng)
    builder.right[node_id] = _grow(builder, x, idx[~mask], depth + 1, height_limit, rng)
    return node_id


def fit_isolation_forest(
    data: TabularDataset,
    n_trees: int = 100,
    psi: int = 256,
    seed: int = 0,
) -> IsolationForestModel:
    """Train a forest of ``n_trees`` isolation trees on subsamples of size
    min(psi, N), with tree height capped at ceil(log2(psi)).

    The dataset must be all-numeric; encode categorical columns first.
    Deterministic for a fixed seed.
    """
    if not data.is_numeric:
        raise ValueError("isolation forest requires numeric-only data")
    if n_trees < 1:
        raise ValueError(f"n_trees must be >= 1, got {n_trees}")
    if psi < 2:
        raise ValueError(f"psi must be >= 2, got {psi}")

    x = data.matrix()
    n = x.shape[0]
    psi_eff = min(psi, n)
    height_limit = math.ceil(math.log2(psi_eff)) if psi_eff > 1 else 0
    rng = np.random.default_rng(seed)

    builder = _ForestBuilder()
    roots = []
    for _ in range(n_trees):
        idx = rng.choice(n, size=psi_eff, replace=False)
        roots.append(_grow(builder, x, idx, 0, height_limit, rng))

    return IsolationForestModel(
        n_trees=n_trees,
        psi=psi,
        seed=seed,
        feature_names=data.feature_names,
        node_feature=np.asarray(builder.feature, dtype=np.int32),
        node_threshold=np.asarray(builder.threshold, dtype=np.float64),
        node_left=np.asarray(builder.left, dtype=np.int32),
        node_right=np.asarray(builder.right, dtype=np.int32),
        node_leaf_value=np.asarray(builder.leaf_value, dtype=np.float64),
        tree_roots=np.asarray(roots, dtype=np.int64),
        c_psi=average_path_length(psi_eff) or 1.0,  # psi_eff == 1 degenerates
    )

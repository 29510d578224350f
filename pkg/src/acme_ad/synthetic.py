"""Ring-shaped synthetic benchmark data.

Points are [rho*cos(theta), rho*sin(theta), noise...] with independent
standard-normal noise columns. Inliers draw the radius from a narrow band
around the origin, outliers from a far disjoint band, which makes the two
leading features the only informative ones. Three ad-hoc test families put
outliers exactly on the first axis, the second axis, or the diagonal, so
the ground-truth relevant feature set is known per family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import NUMERIC, TabularDataset

FAMILIES = ("x-axis", "y-axis", "bisec")


@dataclass(frozen=True)
class SyntheticSpec:
    """Generation parameters; radii bands must stay disjoint."""

    p: int = 6
    n_train: int = 1000
    contamination: float = 0.10
    n_axis_x: int = 100
    n_axis_y: int = 100
    n_bisec: int = 100
    inlier_rho: tuple[float, float] = (0.0, 3.0)
    outlier_rho: tuple[float, float] = (4.0, 30.0)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.p < 2:
            raise ValueError("need at least the two ring dimensions")
        if min(self.n_axis_x, self.n_axis_y, self.n_bisec) < 0:
            raise ValueError("test-outlier counts must be non-negative")
        if not 0.0 <= self.contamination < 1.0:
            raise ValueError("contamination must lie in [0, 1)")
        if self.inlier_rho[1] >= self.outlier_rho[0]:
            raise ValueError("inlier and outlier radius bands must be disjoint")


def _feature_names(p: int) -> tuple[str, ...]:
    return tuple(f"x{i}" for i in range(p))


def _as_dataset(points: np.ndarray, labels: np.ndarray, p: int) -> TabularDataset:
    return TabularDataset(
        feature_names=_feature_names(p),
        column_kinds=(NUMERIC,) * p,
        columns=tuple(points[:, j].copy() for j in range(p)),
        labels=labels,
    )


def _ring_points(
    rng: np.random.Generator, n: int, rho_range: tuple[float, float], p: int
) -> np.ndarray:
    rho = rng.uniform(*rho_range, size=n)
    theta = rng.uniform(0.0, 2.0 * math.pi, size=n)
    noise = rng.standard_normal(size=(n, p - 2))
    return np.column_stack([rho * np.cos(theta), rho * np.sin(theta), noise])


def generate_training(spec: SyntheticSpec) -> TabularDataset:
    """Labeled training table: (1-c)*N inliers and c*N outliers (count
    rounded to nearest), deterministic per seed."""
    rng = np.random.default_rng(spec.seed)
    n_out = round(spec.n_train * spec.contamination)
    n_in = spec.n_train - n_out
    inliers = _ring_points(rng, n_in, spec.inlier_rho, spec.p)
    outliers = _ring_points(rng, n_out, spec.outlier_rho, spec.p)
    points = np.vstack([inliers, outliers])
    labels = np.concatenate(
        [np.zeros(n_in, dtype=np.int64), np.ones(n_out, dtype=np.int64)]
    )
    return _as_dataset(points, labels, spec.p)


def _family_points(
    rng: np.random.Generator, family: str, n: int, spec: SyntheticSpec
) -> np.ndarray:
    rho = rng.uniform(*spec.outlier_rho, size=n)
    sign = rng.choice((-1.0, 1.0), size=n)
    lead = np.zeros((n, 2))
    if family == "x-axis":
        lead[:, 0] = sign * rho
    elif family == "y-axis":
        lead[:, 1] = sign * rho
    elif family == "bisec":
        diag = sign * rho / math.sqrt(2.0)
        lead[:, 0] = diag
        lead[:, 1] = diag
    else:
        raise ValueError(f"unknown family {family!r}")
    noise = rng.standard_normal(size=(n, spec.p - 2))
    return np.column_stack([lead, noise])


def generate_test_outliers(spec: SyntheticSpec) -> dict[str, TabularDataset]:
    """The three ad-hoc outlier families keyed "x-axis", "y-axis", "bisec".

    Every point keeps the outlier radius band; the family is verifiable
    from the first two coordinates alone (second coordinate exactly zero,
    first exactly zero, or both exactly equal). Families with a zero count
    are omitted.
    """
    seeds = np.random.SeedSequence(spec.seed).spawn(4)
    counts = {"x-axis": spec.n_axis_x, "y-axis": spec.n_axis_y, "bisec": spec.n_bisec}
    out: dict[str, TabularDataset] = {}
    for child, family in zip(seeds[1:], FAMILIES):
        rng = np.random.default_rng(child)
        n = counts[family]
        if n == 0:
            continue
        points = _family_points(rng, family, n, spec)
        labels = np.ones(n, dtype=np.int64)
        out[family] = _as_dataset(points, labels, spec.p)
    return out

from pathlib import Path

import numpy as np
import pytest

from acme_ad.dataset import NUMERIC, TabularDataset, build_quantile_grid, load_csv
from acme_ad.iforest import fit_isolation_forest
from acme_ad.model import threshold_and_mapper
from acme_ad.synthetic import SyntheticSpec, generate_training

GLASS_PATH = Path(__file__).resolve().parent.parent / "data" / "glass.csv"

GLASS_MISSING_MSG = (
    "data/glass.csv is missing: this environment has no route to the public "
    "UCI Glass Identification file (no general network; package mirror is a "
    "curated allowlist without dataset packages). Obtain glass.data from the "
    "UCI repository and run `python scripts/prepare_glass.py glass.data "
    "data/glass.csv` to enable this criterion."
)


def load_glass():
    """Glass table (9 numeric features + label) and per-row class ids, or
    None when the data file has not been provisioned."""
    if not GLASS_PATH.exists():
        return None
    data = load_csv(GLASS_PATH, label_column="label", ignore_columns=("class",))
    import csv

    with open(GLASS_PATH, encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        classes = np.array([int(row["class"]) for row in reader])
    return data, classes


class PiecewiseScorer:
    """Deterministic random scorer: a sum of per-feature piecewise-linear
    bumps plus one bilinear interaction, so perturbation responses are
    non-trivial but cheap. Handles numeric rows only."""

    def __init__(self, p: int, rng: np.random.Generator) -> None:
        self.knots = [np.sort(rng.uniform(-2.0, 2.0, size=4)) for _ in range(p)]
        self.heights = [rng.uniform(-1.0, 1.0, size=4) for _ in range(p)]
        self.pair = tuple(rng.choice(p, size=2, replace=False)) if p >= 2 else (0, 0)
        self.pair_weight = float(rng.uniform(-0.5, 0.5))

    def score_batch(self, rows) -> np.ndarray:
        x = np.asarray(rows, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(1, -1)
        total = np.zeros(len(x))
        for j in range(x.shape[1]):
            total += np.interp(x[:, j], self.knots[j], self.heights[j])
        total += self.pair_weight * x[:, self.pair[0]] * x[:, self.pair[1]]
        return total


def random_numeric_dataset(rng: np.random.Generator, n: int, p: int) -> TabularDataset:
    """Random table mixing smooth, discrete (plateau-heavy), and constant
    columns so grid edge cases show up."""
    columns = []
    for j in range(p):
        style = rng.integers(3)
        if style == 0:
            col = rng.normal(size=n)
        elif style == 1:
            col = rng.choice(np.round(rng.normal(size=3), 2), size=n)
        else:
            col = np.full(n, float(rng.normal()))
        columns.append(np.asarray(col, dtype=np.float64))
    return TabularDataset(
        feature_names=tuple(f"f{j}" for j in range(p)),
        column_kinds=(NUMERIC,) * p,
        columns=tuple(columns),
    )


def random_instance(seed: int, max_p: int = 4, max_q: int = 5):
    """(scorer, mapper, grid, data, x): a random small explanation problem.

    The mapper is built from the scorer's outputs on the random table, with
    a threshold strictly inside the score range.
    """
    rng = np.random.default_rng(seed)
    p = int(rng.integers(1, max_p + 1))
    q = int(rng.integers(2, max_q + 1))
    n = int(rng.integers(8, 40))
    while True:
        data = random_numeric_dataset(rng, n, p)
        scorer = PiecewiseScorer(p, rng)
        scores = scorer.score_batch(data.matrix())
        if scores.min() < scores.max():
            break
    grid = build_quantile_grid(data, q)
    contamination = float(rng.uniform(0.1, 0.5))
    t = float(np.quantile(scores, 1.0 - contamination))
    if not scores.min() < t < scores.max():
        t = float((scores.min() + scores.max()) / 2.0)
    from acme_ad.model import ScoreMapper

    mapper = ScoreMapper(lo=float(scores.min()), threshold=t, hi=float(scores.max()))
    row_idx = int(rng.integers(n))
    if rng.random() < 0.5:
        x = data.row(row_idx)
    else:  # off-grid baseline
        x = data.row(row_idx) + rng.normal(scale=0.3, size=p)
    return scorer, mapper, grid, data, x


@pytest.fixture(scope="session")
def ring_setup():
    """Trained detector on the default ring data, shared across tests."""
    spec = SyntheticSpec(seed=0)
    train = generate_training(spec)
    model = fit_isolation_forest(train, n_trees=100, psi=256, seed=0)
    scores = model.score_batch(train.matrix())
    mapper = threshold_and_mapper(scores, 0.10)
    grid = build_quantile_grid(train, 70)
    return spec, train, model, mapper, grid

"""Tabular data ingestion and per-feature quantile grids.

A loaded table is profiled column by column: numeric features expose an
empirical quantile grid (the perturbation levels used by the explainer),
categorical features expose their distinct values with cumulative-frequency
pseudo-quantiles. Both structures are immutable after construction and safe
to share across workers.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

NUMERIC = "numeric"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class TabularDataset:
    """Column-typed table with optional binary ground-truth labels.

    Attributes:
        feature_names: Ordered feature identifiers.
        column_kinds: Per-feature tag, ``"numeric"`` or ``"categorical"``.
        columns: One array per feature. Numeric columns are float64 and
            contain only finite values; categorical columns hold strings.
        labels: Optional per-row array with 1 = outlier, 0 = inlier.
        rejected_rows: Count of input rows dropped at load time.
    """

    feature_names: tuple[str, ...]
    column_kinds: tuple[str, ...]
    columns: tuple[np.ndarray, ...]
    labels: np.ndarray | None = None
    rejected_rows: int = 0

    def __post_init__(self) -> None:
        p = len(self.feature_names)
        if p < 1:
            raise ValueError("dataset needs at least one feature")
        if len(self.column_kinds) != p or len(self.columns) != p:
            raise ValueError("feature_names, column_kinds and columns disagree")
        lengths = {len(c) for c in self.columns}
        if len(lengths) != 1:
            raise ValueError("columns have unequal lengths")
        n = lengths.pop()
        if n < 1:
            raise ValueError("dataset needs at least one row")
        for name, kind, col in zip(self.feature_names, self.column_kinds, self.columns):
            if kind == NUMERIC:
                if not np.isfinite(col).all():
                    raise ValueError(f"numeric column {name!r} holds non-finite values")
            elif kind != CATEGORICAL:
                raise ValueError(f"unknown column kind {kind!r} for {name!r}")
        if self.labels is not None and len(self.labels) != n:
            raise ValueError("labels length does not match row count")

    @property
    def n_rows(self) -> int:
        return len(self.columns[0])

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    @property
    def is_numeric(self) -> bool:
        return all(kind == NUMERIC for kind in self.column_kinds)

    def matrix(self) -> np.ndarray:
        """Rows as a float matrix. Only valid for all-numeric data."""
        if not self.is_numeric:
            raise ValueError("dataset has categorical columns; no float matrix")
        return np.column_stack(self.columns)

    def row(self, i: int) -> np.ndarray:
        """Row ``i`` as a 1-D array (float64 when all features are numeric)."""
        if self.is_numeric:
            return np.array([col[i] for col in self.columns], dtype=np.float64)
        return np.array([col[i] for col in self.columns], dtype=object)


def _parses_as_real(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def load_csv(
    path: str | Path,
    schema: Mapping[str, str] | None = None,
    label_column: str | None = None,
    ignore_columns: Sequence[str] = (),
) -> TabularDataset:
    """Load a comma-separated, header-first UTF-8 file.

    Column kinds come from ``schema`` (feature name -> kind) when given,
    otherwise each column is numeric iff every cell parses as a real number.
    Rows carrying a non-finite value in a numeric column (or a value that
    does not parse under a declared numeric kind) are rejected and counted.

    Args:
        path: File to read.
        schema: Optional kind declaration for the feature columns.
        label_column: Optional header name of a {0,1} ground-truth column.
        ignore_columns: Header names excluded from the feature set.

    Returns:
        The loaded dataset with ``rejected_rows`` set.

    Raises:
        ValueError: Unreadable/empty file, header-schema mismatch, ragged
            rows, bad label values, or no rows surviving rejection.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"cannot read {path}: {exc}") from exc
    return parse_csv(text, schema, label_column, ignore_columns, source=str(path))


def parse_csv(
    text: str,
    schema: Mapping[str, str] | None = None,
    label_column: str | None = None,
    ignore_columns: Sequence[str] = (),
    source: str = "<csv>",
) -> TabularDataset:
    """Parse CSV text already in memory; same rules as :func:`load_csv`."""
    path = source
    reader = csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError(f"{path} is empty") from None
    header = [h.strip() for h in header]

    skip = set(ignore_columns)
    if label_column is not None:
        if label_column not in header:
            raise ValueError(f"label column {label_column!r} not in header")
        skip.add(label_column)

    feature_names = [h for h in header if h not in skip]
    if schema is not None:
        missing = set(schema) - set(feature_names)
        if missing:
            raise ValueError(f"schema columns missing from header: {sorted(missing)}")
        extra = set(feature_names) - set(schema)
        if extra:
            raise ValueError(f"header columns not declared in schema: {sorted(extra)}")
        kinds = [schema[name] for name in feature_names]
        for name, kind in zip(feature_names, kinds):
            if kind not in (NUMERIC, CATEGORICAL):
                raise ValueError(f"unknown kind {kind!r} for column {name!r}")
    else:
        kinds = None  # inferred after reading all rows

    rows: list[list[str]] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and row[0].strip() == ""):
            continue
        if len(row) != len(header):
            raise ValueError(
                f"{path}:{lineno}: expected {len(header)} columns, found {len(row)}"
            )
        rows.append([cell.strip() for cell in row])
    if not rows:
        raise ValueError(f"{path} has no data rows")

    col_index = {name: header.index(name) for name in feature_names}
    if kinds is None:
        kinds = [
            NUMERIC
            if all(_parses_as_real(row[col_index[name]]) for row in rows)
            else CATEGORICAL
            for name in feature_names
        ]

    kept_rows: list[list[str]] = []
    rejected = 0
    for row in rows:
        ok = True
        for name, kind in zip(feature_names, kinds):
            if kind != NUMERIC:
                continue
            cell = row[col_index[name]]
            if not _parses_as_real(cell) or not math.isfinite(float(cell)):
                ok = False
                break
        if ok:
            kept_rows.append(row)
        else:
            rejected += 1
    if not kept_rows:
        raise ValueError(f"{path}: all {rejected} rows rejected (non-finite values)")

    columns: list[np.ndarray] = []
    for name, kind in zip(feature_names, kinds):
        idx = col_index[name]
        if kind == NUMERIC:
            columns.append(np.array([float(r[idx]) for r in kept_rows], dtype=np.float64))
        else:
            columns.append(np.array([r[idx] for r in kept_rows], dtype=object))

    labels = None
    if label_column is not None:
        idx = header.index(label_column)
        raw = [r[idx] for r in kept_rows]
        try:
            labels = np.array([int(float(v)) for v in raw], dtype=np.int64)
        except ValueError:
            raise ValueError(f"label column {label_column!r} holds non-numeric values") from None
        if not np.isin(labels, (0, 1)).all():
            raise ValueError(f"label column {label_column!r} must contain only 0/1")

    return TabularDataset(
        feature_names=tuple(feature_names),
        column_kinds=tuple(kinds),
        columns=tuple(columns),
        labels=labels,
        rejected_rows=rejected,
    )


def write_csv(
    data: TabularDataset,
    path: str | Path,
    extra_columns: Mapping[str, Sequence] | None = None,
) -> None:
    """Write the standard CSV layout: features, then ``label``, then extras."""
    extra_columns = extra_columns or {}
    for name, values in extra_columns.items():
        if len(values) != data.n_rows:
            raise ValueError(f"extra column {name!r} has wrong length")
    header = list(data.feature_names)
    if data.labels is not None:
        header.append("label")
    header.extend(extra_columns)

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(data.n_rows):
            row: list = [repr(float(col[i])) if kind == NUMERIC else col[i]
                         for col, kind in zip(data.columns, data.column_kinds)]
            if data.labels is not None:
                row.append(int(data.labels[i]))
            row.extend(values[i] for values in extra_columns.values())
            writer.writerow(row)


@dataclass(frozen=True)
class FeatureGrid:
    """Perturbation levels for one feature.

    Numeric features carry the empirical quantile values at uniformly spaced
    levels i/(Q-1). Categorical features carry their distinct observed values
    in lexicographic order, with the cumulative relative frequency up to and
    including each value as its pseudo-quantile level.
    """

    kind: str
    levels: np.ndarray
    values: np.ndarray
    _category_level: dict = field(default_factory=dict, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class QuantileGrid:
    """Per-feature perturbation grids plus the value -> level mapping."""

    feature_names: tuple[str, ...]
    grids: tuple[FeatureGrid, ...]
    q: int

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def level_of(self, feature: int, value) -> float:
        """Quantile level in [0, 1] of ``value`` for the given feature.

        Numeric features interpolate linearly between grid points and clamp
        outside the observed range; on a duplicate-value plateau the upper
        CDF position is returned. Categorical features return the stored
        cumulative frequency; an unseen category is an error.
        """
        grid = self.grids[feature]
        if grid.kind == CATEGORICAL:
            try:
                return grid._category_level[value]
            except KeyError:
                raise ValueError(
                    f"unseen category {value!r} for feature {self.feature_names[feature]!r}"
                ) from None

        v = float(value)
        values = grid.values
        levels = grid.levels
        if v < values[0]:
            return 0.0
        if v >= values[-1]:
            return 1.0
        hi = int(np.searchsorted(values, v, side="right"))
        lo = hi - 1
        if values[lo] == v:
            return float(levels[lo])  # upper end of a plateau
        span = values[hi] - values[lo]
        frac = (v - values[lo]) / span
        return float(levels[lo] + frac * (levels[hi] - levels[lo]))

    def to_payload(self) -> dict:
        """JSON-ready export: {feature -> {levels: [...], values: [...]}}."""
        out = {}
        for name, grid in zip(self.feature_names, self.grids):
            values: Iterable
            if grid.kind == NUMERIC:
                values = [float(v) for v in grid.values]
            else:
                values = [str(v) for v in grid.values]
            out[name] = {"levels": [float(l) for l in grid.levels], "values": list(values)}
        return out


def build_quantile_grid(data: TabularDataset, q: int) -> QuantileGrid:
    """Build the perturbation grid: Q quantile values per numeric feature
    (linear-interpolation estimator), all M distinct values per categorical
    feature.
    """
    if q < 2:
        raise ValueError(f"grid resolution must be >= 2, got {q}")
    grids: list[FeatureGrid] = []
    for name, kind, col in zip(data.feature_names, data.column_kinds, data.columns):
        if len(col) == 0:
            raise ValueError(f"feature {name!r} has no observed values")
        if kind == NUMERIC:
            levels = np.linspace(0.0, 1.0, q)
            values = np.quantile(col, levels)
            grids.append(FeatureGrid(kind=NUMERIC, levels=levels, values=values))
        else:
            categories, counts = np.unique(col.astype(str), return_counts=True)
            order = np.argsort(categories)
            categories = categories[order]
            freqs = counts[order] / counts.sum()
            levels = np.cumsum(freqs)
            levels[-1] = 1.0  # guard against rounding drift
            grid = FeatureGrid(
                kind=CATEGORICAL,
                levels=levels,
                values=categories.astype(object),
            )
            grid._category_level.update(
                {cat: float(lvl) for cat, lvl in zip(categories, levels)}
            )
            grids.append(grid)
    return QuantileGrid(feature_names=data.feature_names, grids=tuple(grids), q=q)


def quantile_of(grid: QuantileGrid, feature: int, value) -> float:
    """Module-level alias for :meth:`QuantileGrid.level_of`."""
    if not 0 <= feature < grid.n_features:
        raise IndexError(f"feature index {feature} out of range")
    return grid.level_of(feature, value)

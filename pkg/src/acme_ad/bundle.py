"""Trained-artifact persistence: detector, score mapper, and the training
feature distributions in one versioned JSON file.

The per-feature training distributions travel with the model so any grid
resolution can be rebuilt at explanation time without the original file.
Round trips are exact: a reloaded bundle scores and explains bit-identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import NUMERIC, QuantileGrid, TabularDataset, build_quantile_grid
from .iforest import IsolationForestModel
from .model import ScoreMapper

_FORMAT = "acme-ad-bundle"
_VERSION = 1


@dataclass
class TrainedBundle:
    """Everything needed to explain new points with a trained detector."""

    model: IsolationForestModel
    mapper: ScoreMapper
    reference: TabularDataset

    def grid(self, q: int) -> QuantileGrid:
        return build_quantile_grid(self.reference, q)

    def to_payload(self) -> dict:
        columns = []
        for kind, col in zip(self.reference.column_kinds, self.reference.columns):
            if kind == NUMERIC:
                columns.append([float(v) for v in col])
            else:
                columns.append([str(v) for v in col])
        return {
            "format": _FORMAT,
            "version": _VERSION,
            "model": self.model.to_payload(),
            "mapper": self.mapper.to_payload(),
            "reference": {
                "feature_names": list(self.reference.feature_names),
                "column_kinds": list(self.reference.column_kinds),
                "columns": columns,
            },
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "TrainedBundle":
        if payload.get("format") != _FORMAT:
            raise ValueError("not a trained-bundle dump")
        if payload.get("version") != _VERSION:
            raise ValueError(f"unsupported bundle version {payload.get('version')!r}")
        ref = payload["reference"]
        columns = tuple(
            np.asarray(col, dtype=np.float64)
            if kind == NUMERIC
            else np.asarray(col, dtype=object)
            for kind, col in zip(ref["column_kinds"], ref["columns"])
        )
        reference = TabularDataset(
            feature_names=tuple(ref["feature_names"]),
            column_kinds=tuple(ref["column_kinds"]),
            columns=columns,
        )
        return cls(
            model=IsolationForestModel.from_payload(payload["model"]),
            mapper=ScoreMapper.from_payload(payload["mapper"]),
            reference=reference,
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_payload(), sort_keys=True), encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "TrainedBundle":
        return cls.from_payload(json.loads(Path(path).read_text(encoding="utf-8")))

"""Anomaly-scorer contract, decision threshold, and the [0,1] score map.

Any detector that produces a real-valued score (higher = more anomalous) and
a threshold ``t`` (score <= t means normal) plugs into the explainer. The
mapper rescales raw scores into [0, 1] with 0.5 pinned at the threshold so
that class membership can be read off the mapped value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from .dataset import TabularDataset


@runtime_checkable
class AnomalyScorer(Protocol):
    """Minimal scorer surface the explainer relies on."""

    def score_batch(self, rows) -> np.ndarray:
        """Per-row anomaly scores for a sequence (or matrix) of points."""
        ...


class CountingScorer:
    """Wrapper that counts per-row scorer evaluations.

    Batch calls count one evaluation per row, matching the per-row semantics
    of the contract. Used by the call-count tests and the throughput report.
    """

    def __init__(self, inner: AnomalyScorer) -> None:
        self.inner = inner
        self.calls = 0

    def score_batch(self, rows) -> np.ndarray:
        out = self.inner.score_batch(rows)
        self.calls += len(out)
        return out

    def score(self, x) -> float:
        self.calls += 1
        return float(self.inner.score_batch([x])[0])


def select_threshold(
    scorer: AnomalyScorer,
    data: TabularDataset,
    contamination: float = 0.10,
) -> float:
    """Empirical (1 - contamination)-quantile of the training scores.

    Approximately ``contamination`` of the training rows score strictly
    above the returned threshold.
    """
    if not 0.0 < contamination < 1.0:
        raise ValueError(f"contamination must lie in (0, 1), got {contamination}")
    if data.n_rows < 1:
        raise ValueError("empty dataset")
    scores = np.asarray(scorer.score_batch([data.row(i) for i in range(data.n_rows)]))
    return float(np.quantile(scores, 1.0 - contamination))


@dataclass(frozen=True)
class ScoreMapper:
    """Threshold-anchored piecewise-linear map of raw scores into [0, 1].

    ``lo`` and ``hi`` are the training-score extremes. The map sends
    lo -> 0, threshold -> 0.5, hi -> 1 and clamps outside [lo, hi], so it is
    monotone and preserves which side of the threshold a score falls on.
    """

    lo: float
    threshold: float
    hi: float

    def __post_init__(self) -> None:
        if not (self.lo < self.threshold < self.hi):
            raise ValueError(
                "degenerate training score spread: need lo < threshold < hi, "
                f"got lo={self.lo}, t={self.threshold}, hi={self.hi}"
            )

    def map(self, m: float) -> float:
        if m <= self.threshold:
            f = 0.5 * (m - self.lo) / (self.threshold - self.lo)
        else:
            f = 0.5 + 0.5 * (m - self.threshold) / (self.hi - self.threshold)
        return float(min(1.0, max(0.0, f)))

    def map_batch(self, scores: Sequence[float] | np.ndarray) -> np.ndarray:
        m = np.asarray(scores, dtype=np.float64)
        below = 0.5 * (m - self.lo) / (self.threshold - self.lo)
        above = 0.5 + 0.5 * (m - self.threshold) / (self.hi - self.threshold)
        return np.clip(np.where(m <= self.threshold, below, above), 0.0, 1.0)

    def to_payload(self) -> dict:
        return {"lo": self.lo, "threshold": self.threshold, "hi": self.hi}

    @classmethod
    def from_payload(cls, payload: dict) -> "ScoreMapper":
        return cls(lo=payload["lo"], threshold=payload["threshold"], hi=payload["hi"])


def fit_score_mapper(training_scores: Sequence[float] | np.ndarray, threshold: float) -> ScoreMapper:
    """Build the mapper from training scores and a selected threshold."""
    scores = np.asarray(training_scores, dtype=np.float64)
    if scores.size == 0:
        raise ValueError("no training scores")
    return ScoreMapper(lo=float(scores.min()), threshold=float(threshold), hi=float(scores.max()))


def threshold_and_mapper(
    training_scores: Sequence[float] | np.ndarray,
    contamination: float = 0.10,
) -> ScoreMapper:
    """Contamination-quantile threshold plus mapper from one score pass."""
    if not 0.0 < contamination < 1.0:
        raise ValueError(f"contamination must lie in (0, 1), got {contamination}")
    scores = np.asarray(training_scores, dtype=np.float64)
    if scores.size == 0:
        raise ValueError("no training scores")
    t = float(np.quantile(scores, 1.0 - contamination))
    return ScoreMapper(lo=float(scores.min()), threshold=t, hi=float(scores.max()))


def map_score(mapper: ScoreMapper, m: float) -> float:
    """Mapped score f(m) in [0, 1]; 0.5 marks the decision threshold."""
    return mapper.map(m)

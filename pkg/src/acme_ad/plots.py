"""Visualization-ready data series.

No rendering happens here: each function reshapes an explanation into
exactly the series one chart needs, for the workbench or external tooling.
"""

from __future__ import annotations

from .explainer import GlobalExplanation, LocalExplanation


def _json_value(value):
    return value if isinstance(value, str) else float(value)


def whatif_payload(explanation: LocalExplanation) -> dict:
    """Bubble chart series: one row per feature in descending importance,
    one point per perturbation level, the 0.5 class line, and the baseline
    score/level for the dashed line and the enlarged marker."""
    features = []
    ranks = explanation.rank_positions()
    for j in explanation.ranking:
        j = int(j)
        trace = explanation.traces[j]
        features.append(
            {
                "name": explanation.feature_names[j],
                "rank": int(ranks[j]),
                "importance": float(explanation.importance[j]),
                "crossing": bool(explanation.change[j]),
                "baseline_level": float(trace.baseline_level),
                "points": [
                    {
                        "level": float(level),
                        "value": _json_value(value),
                        "score": float(score),
                    }
                    for level, value, score in zip(trace.levels, trace.values, trace.scores)
                ],
            }
        )
    return {
        "baseline_score": float(explanation.baseline_score),
        "predicted_class": explanation.predicted_class,
        "class_change_score": 0.5,
        "features": features,
    }


def waterfall_payload(explanation: LocalExplanation, feature: int) -> dict:
    """Single-feature bar series: score per perturbed value with the change
    relative to the baseline score, flagged by threshold side."""
    if not 0 <= feature < explanation.n_features:
        raise IndexError(f"feature index {feature} out of range")
    trace = explanation.traces[feature]
    baseline = float(explanation.baseline_score)
    return {
        "feature": explanation.feature_names[feature],
        "baseline_score": baseline,
        "baseline_level": float(trace.baseline_level),
        "class_change_score": 0.5,
        "bars": [
            {
                "level": float(level),
                "value": _json_value(value),
                "score": float(score),
                "delta": float(score) - baseline,
                "below_threshold": bool(score < 0.5),
            }
            for level, value, score in zip(trace.levels, trace.values, trace.scores)
        ],
    }


def global_bars_payload(explanation: GlobalExplanation) -> dict:
    """Ordered bar series for the global importance chart."""
    shares = explanation.shares()
    return {
        "n_anomalies": int(explanation.n_anomalies),
        "bars": [
            {
                "name": explanation.feature_names[int(j)],
                "T": float(explanation.totals[int(j)]),
                "share": float(shares[int(j)]),
            }
            for j in explanation.ranking()
        ],
    }

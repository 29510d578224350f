import numpy as np
import pytest

from acme_ad.explainer import explain_global, explain_local
from acme_ad.plots import global_bars_payload, waterfall_payload, whatif_payload

from conftest import random_instance


@pytest.fixture(scope="module")
def explanation():
    scorer, mapper, grid, data, x = random_instance(14, max_p=4, max_q=5)
    return explain_local(scorer, mapper, grid, x)


class TestWhatIf:
    def test_rows_in_descending_importance(self, explanation):
        payload = whatif_payload(explanation)
        assert payload["class_change_score"] == 0.5
        importances = [f["importance"] for f in payload["features"]]
        assert importances == sorted(importances, reverse=True)
        assert len(payload["features"]) == explanation.n_features

    def test_points_carry_level_value_score(self, explanation):
        feature = whatif_payload(explanation)["features"][0]
        assert len(feature["points"]) == len(
            explanation.traces[explanation.ranking[0]].scores
        )
        assert {"level", "value", "score"} == set(feature["points"][0])

    def test_crossing_flag_matches_change(self, explanation):
        payload = whatif_payload(explanation)
        by_name = {f["name"]: f for f in payload["features"]}
        for j, name in enumerate(explanation.feature_names):
            assert by_name[name]["crossing"] == bool(explanation.change[j])


class TestWaterfall:
    def test_bars_and_threshold_styling(self, explanation):
        payload = waterfall_payload(explanation, 0)
        trace = explanation.traces[0]
        assert len(payload["bars"]) == len(trace.scores)
        for bar, score in zip(payload["bars"], trace.scores):
            assert bar["delta"] == pytest.approx(bar["score"] - payload["baseline_score"])
            assert bar["below_threshold"] == (score < 0.5)

    def test_zero_delta_when_baseline_on_grid(self, explanation):
        payload = waterfall_payload(explanation, 0)
        # a bar whose perturbed score equals the baseline has zero length
        for bar in payload["bars"]:
            if bar["score"] == payload["baseline_score"]:
                assert bar["delta"] == 0.0

    def test_bad_feature_index(self, explanation):
        with pytest.raises(IndexError):
            waterfall_payload(explanation, 99)


class TestGlobalBars:
    def test_ordered_descending(self):
        scorer, mapper, grid, data, x = random_instance(23)
        g = explain_global(scorer, mapper, grid, [data.row(i) for i in range(data.n_rows)])
        payload = global_bars_payload(g)
        values = [b["T"] for b in payload["bars"]]
        assert values == sorted(values, reverse=True)
        assert payload["n_anomalies"] == g.n_anomalies

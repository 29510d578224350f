import json

import numpy as np
import pytest
from click.testing import CliRunner

from acme_ad.cli import main
from acme_ad.dataset import write_csv
from acme_ad.synthetic import SyntheticSpec, generate_training

from conftest import GLASS_PATH


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def train_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "train.csv"
    write_csv(generate_training(SyntheticSpec(p=4, n_train=300, seed=2)), path)
    return path


@pytest.fixture(scope="module")
def model_file(runner, train_csv, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli-model") / "model.json"
    result = runner.invoke(
        main,
        ["train", "--data", str(train_csv), "--trees", "40", "--psi", "64",
         "--seed", "2", "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    return out


class TestTrain:
    def test_reports_threshold_and_f1(self, runner, train_csv, tmp_path):
        out = tmp_path / "m.json"
        result = runner.invoke(
            main,
            ["train", "--data", str(train_csv), "--trees", "40", "--psi", "64",
             "--seed", "2", "--out", str(out)],
        )
        assert result.exit_code == 0
        assert "threshold=" in result.output
        assert "f1=" in result.output

    def test_same_seed_same_digest(self, runner, train_csv, tmp_path):
        digests = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            result = runner.invoke(
                main,
                ["train", "--data", str(train_csv), "--trees", "20", "--psi", "32",
                 "--seed", "11", "--out", str(out)],
            )
            assert result.exit_code == 0
            digests.append(result.output.split("sha256=")[1].strip())
        assert digests[0] == digests[1]

    def test_empty_file_is_usage_error(self, runner, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        result = runner.invoke(main, ["train", "--data", str(empty)])
        assert result.exit_code == 2
        assert "empty" in result.output

    @pytest.mark.skipif(not GLASS_PATH.exists(), reason="glass data not provisioned")
    def test_glass_f1_near_published(self, runner, tmp_path):
        out = tmp_path / "glass-model.json"
        result = runner.invoke(
            main,
            ["train", "--data", str(GLASS_PATH), "--ignore-columns", "class",
             "--trees", "100", "--psi", "32", "--seed", "0", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        f1 = float(result.output.split("f1=")[1].splitlines()[0])
        assert abs(f1 - 0.7706) <= 0.10


class TestExplain:
    def test_outputs_and_determinism(self, runner, model_file, train_csv, tmp_path):
        outputs = []
        for name in ("e1", "e2"):
            out = tmp_path / name
            result = runner.invoke(
                main,
                ["explain", "--model", str(model_file), "--data", str(train_csv),
                 "--rows", "0,5,270", "--workers", "1", "--out", str(out)],
            )
            assert result.exit_code == 0, result.output
            outputs.append(
                {p.name: p.read_bytes() for p in sorted(out.iterdir())}
            )
        assert outputs[0] == outputs[1]
        names = set(outputs[0])
        assert {"local_row0.json", "whatif_row0.json", "waterfall_row0.json",
                "global.json", "global_bars.json"} <= names

    def test_default_weights_echoed(self, runner, model_file, train_csv, tmp_path):
        out = tmp_path / "w"
        result = runner.invoke(
            main,
            ["explain", "--model", str(model_file), "--data", str(train_csv),
             "--rows", "0", "--out", str(out)],
        )
        assert result.exit_code == 0
        payload = json.loads((out / "local_row0.json").read_text())
        assert payload["weights"] == {"D": 0.3, "C": 0.3, "Q": 0.2, "R": 0.2}

    def test_anomalies_only_counts(self, runner, model_file, train_csv, tmp_path):
        out = tmp_path / "anom"
        result = runner.invoke(
            main,
            ["explain", "--model", str(model_file), "--data", str(train_csv),
             "--anomalies-only", "--out", str(out)],
        )
        assert result.exit_code == 0
        n_local = len(list(out.glob("local_row*.json")))
        g = json.loads((out / "global.json").read_text())
        assert g["n_anomalies"] == n_local  # every selected row was anomalous
        assert n_local > 0

    def test_invalid_weights_exit_2(self, runner, model_file, train_csv, tmp_path):
        result = runner.invoke(
            main,
            ["explain", "--model", str(model_file), "--data", str(train_csv),
             "--rows", "0", "--weights", "0.4,0.3,0.2,0.0", "--out", str(tmp_path)],
        )
        assert result.exit_code == 2
        assert "convex" in result.output

    def test_row_out_of_range_exit_2(self, runner, model_file, train_csv, tmp_path):
        result = runner.invoke(
            main,
            ["explain", "--model", str(model_file), "--data", str(train_csv),
             "--rows", "100000", "--out", str(tmp_path)],
        )
        assert result.exit_code == 2
        assert "out of range" in result.output

    def test_selector_required(self, runner, model_file, train_csv, tmp_path):
        result = runner.invoke(
            main,
            ["explain", "--model", str(model_file), "--data", str(train_csv),
             "--out", str(tmp_path)],
        )
        assert result.exit_code == 2


class TestExperiment:
    def test_unknown_name_exit_2(self, runner):
        result = runner.invoke(main, ["experiment", "bogus"])
        assert result.exit_code == 2
        assert "synthetic-ranks" in result.output  # valid names listed

    def test_throughput_fraction_ratio(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["experiment", "throughput", "--fractions", "20,100", "--p", "4",
             "--n-train", "300", "--trees", "30", "--psi", "64",
             "--quantiles", "9", "--out", str(tmp_path)],
        )
        assert result.exit_code == 0, result.output
        report = json.loads((tmp_path / "throughput_synthetic_0.json").read_text())
        calls = [pt["scorer_calls"] for pt in report["points"]]
        rows = [pt["n_rows"] for pt in report["points"]]
        per_row = 4 * 9 + 1
        assert calls[0] == rows[0] * per_row and calls[1] == rows[1] * per_row
        assert calls[1] / calls[0] == pytest.approx(5.0, abs=0.2)
        assert (tmp_path / "throughput_synthetic_0.csv").exists()

    def test_synthetic_ranks_report(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["experiment", "synthetic-ranks", "--n-train", "400", "--trees", "50",
             "--quantiles", "20", "--seed", "1", "--check", "--out", str(tmp_path)],
        )
        assert result.exit_code == 0, result.output
        report = json.loads((tmp_path / "synthetic-ranks_synthetic_1.json").read_text())
        assert report["families"]["x-axis"]["top1_share"]["x0"] >= 0.70
        csv_text = (tmp_path / "synthetic-ranks_synthetic_1.csv").read_text()
        assert csv_text.startswith("family,feature,position,fraction")

    def test_feature_selection_requires_data(self, runner):
        result = runner.invoke(main, ["experiment", "feature-selection"])
        assert result.exit_code == 2
        assert "--data" in result.output

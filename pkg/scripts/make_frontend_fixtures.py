#!/usr/bin/env python3
"""Regenerate the workbench test fixtures from real CLI runs.

Produces, under frontend/tests/fixtures/:
  local_explanation.json  - one anomalous row's explanation (Q=12)
  weight_rankings.json    - 20 random weight vectors with the feature
                            ranking a from-scratch CLI run produced for each
  global_explanation.json - the global payload over detected anomalies

Deterministic: fixed seeds end to end, so reruns are byte-stable.
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

import numpy as np
from click.testing import CliRunner

from acme_ad.cli import main as cli_main
from acme_ad.dataset import write_csv
from acme_ad.synthetic import SyntheticSpec, generate_test_outliers, generate_training

FIXTURES = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures"
Q = 12


def _run(runner: CliRunner, args: list[str]) -> None:
    result = runner.invoke(cli_main, args)
    if result.exit_code != 0:
        raise SystemExit(f"cli failed: {args}\n{result.output}")


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    runner = CliRunner()
    with tempfile.TemporaryDirectory() as tmp:
        tmp_path = Path(tmp)
        spec = SyntheticSpec(p=5, n_train=400, seed=42)
        train_csv = tmp_path / "train.csv"
        write_csv(generate_training(spec), train_csv)
        test_csv = tmp_path / "test.csv"
        write_csv(generate_test_outliers(spec)["x-axis"], test_csv)

        model_path = tmp_path / "model.json"
        _run(runner, [
            "train", "--data", str(train_csv), "--trees", "60", "--psi", "128",
            "--seed", "42", "--out", str(model_path),
        ])

        # pick a detected anomaly whose sub-score orderings disagree, so the
        # weight-exploration fixture exercises real re-rankings
        from acme_ad.bundle import TrainedBundle
        from acme_ad.dataset import load_csv
        from acme_ad.explainer import Weights, explain_local, reweight

        bundle = TrainedBundle.load(model_path)
        grid = bundle.grid(Q)
        test_data = load_csv(test_csv, label_column="label")
        scores = bundle.model.score_batch(test_data.matrix())
        detected = [int(i) for i in np.flatnonzero(scores > bundle.mapper.threshold)]
        probe_weights = [
            Weights(1, 0, 0, 0), Weights(0, 1, 0, 0),
            Weights(0, 0, 1, 0), Weights(0, 0, 0, 1),
        ]

        def ranking_diversity(row_index: int) -> int:
            exp = explain_local(
                bundle.model, bundle.mapper, grid, test_data.row(row_index)
            )
            return len({tuple(reweight(exp, w).ranking.tolist()) for w in probe_weights})

        row = max(detected[:25], key=ranking_diversity)

        base_out = tmp_path / "base"
        _run(runner, [
            "explain", "--model", str(model_path), "--data", str(test_csv),
            "--rows", str(row), "--quantiles", str(Q), "--workers", "1",
            "--out", str(base_out),
        ])
        local = json.loads((base_out / f"local_row{row}.json").read_text())
        (FIXTURES / "local_explanation.json").write_text(
            json.dumps(local, indent=2, sort_keys=True) + "\n"
        )

        rng = np.random.default_rng(2025)
        entries = []
        for trial in range(20):
            w = rng.dirichlet(np.ones(4))
            weights = {"D": float(w[0]), "C": float(w[1]), "Q": float(w[2]),
                       "R": float(w[3])}
            out = tmp_path / f"w{trial}"
            _run(runner, [
                "explain", "--model", str(model_path), "--data", str(test_csv),
                "--rows", str(row), "--quantiles", str(Q), "--workers", "1",
                "--weights",
                f"{weights['D']},{weights['C']},{weights['Q']},{weights['R']}",
                "--out", str(out),
            ])
            payload = json.loads((out / f"local_row{row}.json").read_text())
            ranking = [
                f["name"] for f in sorted(payload["features"], key=lambda f: f["rank"])
            ]
            entries.append({"weights": weights, "ranking": ranking})
        (FIXTURES / "weight_rankings.json").write_text(
            json.dumps(entries, indent=2, sort_keys=True) + "\n"
        )

        glob_out = tmp_path / "glob"
        _run(runner, [
            "explain", "--model", str(model_path), "--data", str(test_csv),
            "--anomalies-only", "--quantiles", str(Q), "--workers", "1",
            "--out", str(glob_out),
        ])
        global_payload = json.loads((glob_out / "global.json").read_text())
        (FIXTURES / "global_explanation.json").write_text(
            json.dumps(global_payload, indent=2, sort_keys=True) + "\n"
        )
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()

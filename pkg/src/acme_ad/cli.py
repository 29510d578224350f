"""Batch command-line interface: train, explain, and reproduce experiments.

Exit codes: 0 success, 1 runtime failure, 2 usage error. All outputs are
plain JSON/CSV data series; rendering is left to the workbench or external
tooling. Set ``ACME_AD_LOG`` to control log verbosity.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
from pathlib import Path

import click
import numpy as np

from .bundle import TrainedBundle
from .dataset import TabularDataset, load_csv
from .evaluation import f1_score
from .experiments import (
    FeatureSelectionConfig,
    SyntheticRanksConfig,
    ThroughputConfig,
    run_feature_selection,
    run_synthetic_ranks,
    run_throughput,
)
from .explainer import Weights, aggregate_locals, explain_rows
from .iforest import fit_isolation_forest
from .model import threshold_and_mapper
from .plots import global_bars_payload, waterfall_payload, whatif_payload

logger = logging.getLogger("acme_ad")

EXPERIMENTS = ("synthetic-ranks", "feature-selection", "throughput")


def _configure_logging() -> None:
    level = os.environ.get("ACME_AD_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _dump_json(payload: dict, path: Path) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _sniff_label_column(path: Path, explicit: str | None) -> str | None:
    if explicit is not None:
        return explicit or None
    try:
        header = path.read_text(encoding="utf-8").splitlines()[0]
    except (OSError, IndexError):
        return None
    return "label" if "label" in [h.strip() for h in header.split(",")] else None


def _load_table(path: str, label_column: str | None, ignore: str) -> TabularDataset:
    ignore_columns = tuple(c.strip() for c in ignore.split(",") if c.strip())
    file_path = Path(path)
    label = _sniff_label_column(file_path, label_column)
    try:
        return load_csv(file_path, label_column=label, ignore_columns=ignore_columns)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc


def _parse_weights(raw: str | None) -> Weights | None:
    """Parse ``wD,wC,wQ,wR`` into validated convex weights."""
    if raw is None:
        return None
    parts = raw.split(",")
    if len(parts) != 4:
        raise click.UsageError("--weights needs four values: wD,wC,wQ,wR")
    try:
        w_d, w_c, w_q, w_r = (float(v) for v in parts)
        return Weights(delta=w_d, change=w_c, distance=w_q, ratio=w_r)
    except ValueError as exc:
        raise click.UsageError(f"invalid convex weights: {exc}") from exc


def _resolve_contamination(explicit: float | None, data: TabularDataset) -> float:
    """Explicit value wins; otherwise the labeled outlier rate when labels
    exist, else the 0.10 default."""
    if explicit is not None:
        if not 0.0 < explicit < 1.0:
            raise click.UsageError("--contamination must lie in (0, 1)")
        return explicit
    if data.labels is not None and 0 < int(data.labels.sum()) < data.n_rows:
        return float(data.labels.mean())
    return 0.10


@click.group()
@click.version_option()
def main() -> None:
    """Quantile-perturbation explanations for tabular anomaly detection."""
    _configure_logging()


@main.command()
@click.option("--data", required=True, help="Training CSV (header row first).")
@click.option("--label-column", default=None, help="Ground-truth column; auto-detects 'label'.")
@click.option("--ignore-columns", default="", help="Comma-separated columns to drop.")
@click.option("--trees", default=100, show_default=True, help="Number of isolation trees.")
@click.option("--psi", default=256, show_default=True, help="Per-tree subsample size.")
@click.option("--contamination", default=None, type=float,
              help="Assumed outlier fraction [default: label rate, else 0.10].")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default="model.json", show_default=True, help="Bundle output path.")
def train(data, label_column, ignore_columns, trees, psi, contamination, seed, out):
    """Train the bundled isolation forest and save model + score mapper."""
    table = _load_table(data, label_column, ignore_columns)
    if not table.is_numeric:
        raise click.UsageError("training data must be numeric-only; encode categoricals first")
    contamination = _resolve_contamination(contamination, table)
    try:
        model = fit_isolation_forest(table, n_trees=trees, psi=psi, seed=seed)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    scores = model.score_batch(table.matrix())
    mapper = threshold_and_mapper(scores, contamination)
    model.threshold = mapper.threshold

    reference = TabularDataset(
        feature_names=table.feature_names,
        column_kinds=table.column_kinds,
        columns=table.columns,
    )
    bundle = TrainedBundle(model=model, mapper=mapper, reference=reference)
    out_path = Path(out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    bundle.save(out_path)

    digest = hashlib.sha256(out_path.read_bytes()).hexdigest()
    click.echo(f"rows={table.n_rows} features={table.n_features} rejected={table.rejected_rows}")
    click.echo(f"threshold={mapper.threshold!r} contamination={contamination!r}")
    if table.labels is not None:
        predicted = (scores > mapper.threshold).astype(np.int64)
        precision, recall, f1 = f1_score(predicted, table.labels)
        click.echo(f"train precision={precision:.4f} recall={recall:.4f} f1={f1:.4f}")
    click.echo(f"saved {out_path} sha256={digest}")


@main.command()
@click.option("--model", "model_path", required=True, help="Trained bundle from `train`.")
@click.option("--data", required=True, help="CSV with rows to explain.")
@click.option("--rows", default=None, help="Comma-separated row indices to explain.")
@click.option("--anomalies-only", is_flag=True, help="Explain every detected anomaly.")
@click.option("--weights", default=None, help="Sub-score weights wD,wC,wQ,wR.")
@click.option("--quantiles", default=70, show_default=True, help="Perturbation grid resolution.")
@click.option("--label-column", default=None, help="Ground-truth column; auto-detects 'label'.")
@click.option("--ignore-columns", default="", help="Comma-separated columns to drop.")
@click.option("--workers", default=None, type=int,
              help="Explanation fan-out processes [default: available parallelism].")
@click.option("--out", default="explanations", show_default=True, help="Output directory.")
def explain(model_path, data, rows, anomalies_only, weights, quantiles, label_column,
            ignore_columns, workers, out):
    """Emit local explanations, the global summary, and plot-data files."""
    if (rows is None) == (not anomalies_only):
        raise click.UsageError("select rows with exactly one of --rows / --anomalies-only")
    w = _parse_weights(weights)
    try:
        bundle = TrainedBundle.load(model_path)
        grid = bundle.grid(quantiles)
    except (OSError, ValueError) as exc:
        raise click.UsageError(f"cannot load model bundle: {exc}") from exc

    table = _load_table(data, label_column, ignore_columns)
    if table.feature_names != bundle.reference.feature_names:
        raise click.UsageError(
            f"data features {table.feature_names} do not match the model's "
            f"{bundle.reference.feature_names}"
        )

    if anomalies_only:
        scores = bundle.model.score_batch(table.matrix())
        indices = [int(i) for i in np.flatnonzero(scores > bundle.mapper.threshold)]
    else:
        try:
            indices = [int(v) for v in rows.split(",") if v.strip()]
        except ValueError as exc:
            raise click.UsageError(f"bad --rows value: {exc}") from exc
        bad = [i for i in indices if not 0 <= i < table.n_rows]
        if bad:
            raise click.UsageError(f"row selector out of range: {bad} (N={table.n_rows})")

    if workers is None:
        workers = os.cpu_count() or 1
    explanations = explain_rows(
        bundle.model, bundle.mapper, grid,
        [table.row(i) for i in indices], w, workers=workers,
    )

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for row_index, exp in zip(indices, explanations):
        _dump_json(exp.to_payload(), out_dir / f"local_row{row_index}.json")
        _dump_json(whatif_payload(exp), out_dir / f"whatif_row{row_index}.json")
        waterfalls = {
            name: waterfall_payload(exp, j)
            for j, name in enumerate(exp.feature_names)
        }
        _dump_json({"features": waterfalls}, out_dir / f"waterfall_row{row_index}.json")

    global_exp = aggregate_locals(explanations, grid.feature_names)
    _dump_json(global_exp.to_payload(), out_dir / "global.json")
    _dump_json(global_bars_payload(global_exp), out_dir / "global_bars.json")
    click.echo(
        f"explained {len(indices)} rows ({global_exp.n_anomalies} anomalous) -> {out_dir}"
    )


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _synthetic_ranks_csv(report: dict) -> tuple[list[str], list[list]]:
    rows = []
    for family, entry in report["families"].items():
        matrix = entry.get("rank_matrix")
        if matrix is None:
            continue
        names = list(report["feature_names"])
        for j, name in enumerate(names):
            for position in range(len(names)):
                rows.append([family, name, position + 1, matrix[j][position]])
    return ["family", "feature", "position", "fraction"], rows


@main.command()
@click.argument("name", type=click.Choice(EXPERIMENTS))
@click.option("--data", default=None, help="Input CSV (required for feature-selection).")
@click.option("--label-column", default=None, help="Ground-truth column; auto-detects 'label'.")
@click.option("--ignore-columns", default="", help="Comma-separated columns to drop.")
@click.option("--trees", default=100, show_default=True)
@click.option("--psi", default=None, type=int,
              help="Per-tree subsample size [default: 256, feature-selection keeps it too].")
@click.option("--quantiles", default=70, show_default=True)
@click.option("--contamination", default=None, type=float,
              help="Assumed outlier fraction [default: label rate, else 0.10].")
@click.option("--instances", default=5, show_default=True,
              help="Model instances aggregated for feature selection.")
@click.option("--retrains", default=50, show_default=True,
              help="Retrains per k in the feature-selection sweep.")
@click.option("--fractions", default="20,40,60,80,100", show_default=True,
              help="Throughput fractions, in percent.")
@click.option("--n-train", default=None, type=int, help="Synthetic training size override.")
@click.option("--p", "n_features", default=None, type=int, help="Synthetic dimension override.")
@click.option("--seed", default=0, show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--check", is_flag=True, help="Exit nonzero when acceptance thresholds fail.")
@click.option("--out", default="reports", show_default=True, help="Report directory.")
def experiment(name, data, label_column, ignore_columns, trees, psi, quantiles,
               contamination, instances, retrains, fractions, n_train, n_features,
               seed, workers, check, out):
    """Run an end-to-end evaluation pipeline and write JSON + CSV reports."""
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset_name = Path(data).stem if data else "synthetic"
    stem = f"{name}_{dataset_name}_{seed}"
    violations: list[str] = []

    if name == "synthetic-ranks":
        config = SyntheticRanksConfig(
            p=n_features or 6,
            n_train=n_train or 1000,
            contamination=contamination if contamination is not None else 0.10,
            n_trees=trees,
            psi=psi or 256,
            quantiles=quantiles,
            seed=seed,
            workers=workers,
        )
        report = run_synthetic_ranks(config)
        report["feature_names"] = [f"x{i}" for i in range(config.p)]
        header, rows = _synthetic_ranks_csv(report)
        _write_csv(out_dir / f"{stem}.csv", header, rows)
        families = report["families"]
        click.echo(
            "top-1 shares: "
            f"x-axis x0={families['x-axis']['top1_share']['x0']:.3f} "
            f"y-axis x1={families['y-axis']['top1_share']['x1']:.3f} "
            f"bisec pair={families['bisec']['lead_pair_top2_share']:.3f}"
        )
        if check:
            if families["x-axis"]["top1_share"]["x0"] < 0.70:
                violations.append("x-axis top-1 share below 0.70")
            if families["y-axis"]["top1_share"]["x1"] < 0.70:
                violations.append("y-axis top-1 share below 0.70")
            if families["bisec"]["lead_pair_top2_share"] < 0.70:
                violations.append("bisec top-2 pair share below 0.70")

    elif name == "feature-selection":
        if data is None:
            raise click.UsageError("feature-selection needs --data")
        table = _load_table(data, label_column, ignore_columns)
        config = FeatureSelectionConfig(
            n_instances=instances,
            retrains=retrains,
            n_trees=trees,
            psi=psi or 256,
            quantiles=quantiles,
            contamination=_resolve_contamination(contamination, table),
            seed=seed,
            workers=workers,
        )
        try:
            report = run_feature_selection(table, config)
        except ValueError as exc:
            raise click.UsageError(str(exc)) from exc
        curve_rows = [
            [c["k"], "|".join(c["selected"]), c["guided_median_f1"], c["random_median_f1"]]
            for c in report["curve"]["curve"]
        ]
        _write_csv(out_dir / f"{stem}.csv",
                   ["k", "selected", "guided_median_f1", "random_median_f1"], curve_rows)
        click.echo(f"aggregate ranking: {report['aggregate_ranking']}")
        click.echo(
            f"guided >= random at {report['k_values_guided_at_least_random']} of "
            f"{len(curve_rows)} k values"
        )
        if check:
            needed = math.ceil(0.8 * len(curve_rows))
            if report["k_values_guided_at_least_random"] < needed:
                violations.append(
                    f"guided curve dominates at {report['k_values_guided_at_least_random']} "
                    f"< {needed} k values"
                )

    else:  # throughput
        try:
            fraction_values = tuple(int(v) / 100.0 for v in fractions.split(",") if v.strip())
        except ValueError as exc:
            raise click.UsageError(f"bad --fractions value: {exc}") from exc
        if not fraction_values:
            raise click.UsageError("--fractions must list at least one percentage")
        table = None
        if data is not None:
            table = _load_table(data, label_column, ignore_columns)
        config = ThroughputConfig(
            p=n_features or 36,
            n_rows=n_train or 6435,
            contamination=contamination if contamination is not None else 0.10,
            n_trees=trees,
            psi=psi or 256,
            quantiles=quantiles,
            fractions=fraction_values,
            seed=seed,
        )
        report = run_throughput(config, data=table)
        _write_csv(
            out_dir / f"{stem}.csv",
            ["fraction", "n_rows", "seconds", "scorer_calls"],
            [[pt["fraction"], pt["n_rows"], pt["seconds"], pt["scorer_calls"]]
             for pt in report["points"]],
        )
        click.echo(
            f"explained up to {report['points'][-1]['n_rows']} rows; "
            f"R^2={report['r_squared']:.4f} "
            f"slope={report['slope_seconds_per_row'] * 1000:.2f} ms/row"
        )
        if check and len(fraction_values) >= 4 and report["r_squared"] < 0.95:
            violations.append(f"time-vs-rows fit R^2 {report['r_squared']:.4f} < 0.95")

    _dump_json(report, out_dir / f"{stem}.json")
    click.echo(f"report written to {out_dir / stem}.json")
    if violations:
        for v in violations:
            click.echo(f"CHECK FAILED: {v}", err=True)
        raise SystemExit(1)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--persist", default=None, help="Directory for on-disk registry persistence.")
def serve(host, port, persist):
    """Run the HTTP service for the analyst workbench."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(persist_dir=persist), host=host, port=port)


if __name__ == "__main__":
    main()

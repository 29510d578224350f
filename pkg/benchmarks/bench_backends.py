#!/usr/bin/env python3
"""Compare the compiled forest kernel against the NumPy fallback.

Times raw batch scoring and full local explanations on the same trained
forest, then prints per-call medians and the speedup. Run after building
the extension (`pip install -e . --no-build-isolation`):

    python benchmarks/bench_backends.py [--rows 2000] [--p 36] [--trees 100]
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from acme_ad import _kernels_py
from acme_ad.dataset import build_quantile_grid
from acme_ad.explainer import explain_local
from acme_ad.iforest import fit_isolation_forest
from acme_ad.model import threshold_and_mapper
from acme_ad.synthetic import SyntheticSpec, generate_training

try:
    from acme_ad import _kernels
except ImportError:
    _kernels = None


def _time(fn, repeats: int = 7) -> float:
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


class _Patched:
    """Forest whose kernel function is swapped per backend."""

    def __init__(self, model, kernel):
        self.model = model
        self.kernel = kernel

    def score_batch(self, rows):
        x = np.ascontiguousarray(rows, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(1, -1)
        depths = self.kernel(
            self.model.node_feature,
            self.model.node_threshold,
            self.model.node_left,
            self.model.node_right,
            self.model.node_leaf_value,
            self.model.tree_roots,
            x,
        )
        return np.power(2.0, -depths / self.model.c_psi)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=2000, help="batch size for raw scoring")
    parser.add_argument("--p", type=int, default=36)
    parser.add_argument("--trees", type=int, default=100)
    parser.add_argument("--psi", type=int, default=256)
    parser.add_argument("--quantiles", type=int, default=70)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    data = generate_training(
        SyntheticSpec(p=args.p, n_train=max(args.rows, 1000), seed=args.seed)
    )
    model = fit_isolation_forest(data, n_trees=args.trees, psi=args.psi, seed=args.seed)
    x = np.ascontiguousarray(data.matrix()[: args.rows])
    mapper = threshold_and_mapper(model.score_batch(data.matrix()), 0.10)
    grid = build_quantile_grid(data, args.quantiles)
    outlier = data.row(int(np.argmax(model.score_batch(data.matrix()))))

    backends = {"python": _kernels_py.mean_path_length}
    if _kernels is not None:
        backends["compiled"] = _kernels.mean_path_length
    else:
        print("compiled kernel unavailable; benchmarking the fallback only")

    print(f"forest: {args.trees} trees, psi={args.psi}, p={args.p}; batch={args.rows} rows")
    results = {}
    for name, kernel in backends.items():
        patched = _Patched(model, kernel)
        score_t = _time(lambda: patched.score_batch(x))
        explain_t = _time(lambda: explain_local(patched, mapper, grid, outlier))
        results[name] = (score_t, explain_t)
        print(
            f"{name:>9}: score_batch {1e3 * score_t:8.2f} ms "
            f"({1e9 * score_t / args.rows:7.1f} ns/row)   "
            f"explain_local {1e3 * explain_t:8.2f} ms"
        )
        sanity = patched.score_batch(x[:50])
        results[name] = (score_t, explain_t, sanity)

    if len(results) == 2:
        py = results["python"]
        cy = results["compiled"]
        if not np.array_equal(py[2], cy[2]):
            raise SystemExit("backends disagree on scores; benchmark void")
        print(
            f"speedup (python/compiled): scoring x{py[0] / cy[0]:.1f}, "
            f"explanation x{py[1] / cy[1]:.1f}; outputs bit-identical"
        )


if __name__ == "__main__":
    main()

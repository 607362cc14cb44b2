#!/usr/bin/env python3
"""Benchmark the compiled routing kernel against the numpy fallback.

Routing dominates the active-learning loop (depth matrix + per-iteration
test scoring), so this is the number that matters when deciding whether the
extension build is worth it on a given box.

    python benchmarks/bench_kernels.py [--points N] [--trees T] [--psi P]
"""

import argparse
import time

import numpy as np

from actiforest._kernels import py_routing
from actiforest.iforest import fit

try:
    from actiforest._kernels import _routing as _compiled
except ImportError:
    _compiled = None


def time_backend(fn, args, repeats=7):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=20000)
    parser.add_argument("--trees", type=int, default=100)
    parser.add_argument("--psi", type=int, default=256)
    parser.add_argument("--features", type=int, default=8)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    X = rng.normal(size=(args.points, args.features))
    forest = fit(X, n_trees=args.trees, psi=args.psi, seed=args.seed)
    call_args = (
        forest.feature,
        forest.threshold,
        forest.left,
        forest.right,
        forest.leaf_index,
        forest.roots,
        X,
    )
    work = args.points * args.trees

    t_py = time_backend(py_routing.route_forest, call_args)
    print(f"python  backend: {t_py * 1e3:8.2f} ms   {work / t_py / 1e6:8.1f} M routings/s")

    if _compiled is None:
        print("compiled backend: not built (pip install -e . --no-build-isolation)")
        return

    t_c = time_backend(_compiled.route_forest, call_args)
    print(f"compiled backend: {t_c * 1e3:8.2f} ms   {work / t_c / 1e6:8.1f} M routings/s")
    print(f"speedup: {t_py / t_c:.1f}x")

    same = np.array_equal(
        py_routing.route_forest(*call_args), _compiled.route_forest(*call_args)
    )
    print(f"outputs identical: {same}")


if __name__ == "__main__":
    main()

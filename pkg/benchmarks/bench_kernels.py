"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--n 64]

Both backends run on identical inputs; outputs are compared before timing.
"""

import argparse
import time

import numpy as np

from coarsemedian._kernels import compiled, pure
from coarsemedian.cube_complex import product
from coarsemedian.median_core import MajorityAlgebra, TreeMedianAlgebra, enumerate_walls
from coarsemedian.median_metrics import wall_metric


def _tree(n, seed):
    rng = np.random.default_rng(seed)
    edges = [(i, int(rng.integers(0, i))) for i in range(1, n)]
    return TreeMedianAlgebra(list(range(n)), edges)


def _metric(M, seed):
    rng = np.random.default_rng(seed)
    return np.asarray(wall_metric(M, rng.integers(1, 5, len(enumerate_walls(M))).astype(float)).matrix, dtype=np.float64)


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=64, help="algebra size (multiple of 4)")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    M = product(MajorityAlgebra(2), _tree(args.n // 4, args.seed))
    table = np.ascontiguousarray(M.table(), dtype=np.int64)
    D = _metric(M, args.seed)
    side = np.random.default_rng(args.seed).uniform(0, 4, (args.n,) * 3)
    bits = pure.interval_bitsets(D, True, 0.0)

    jobs = {
        "distributivity_violations": lambda k: k.distributivity_violations(table, 1000),
        "interval_bitsets": lambda k: k.interval_bitsets(D, True, 0.0),
        "median_scan (all x)": lambda k: [k.median_scan(bits, x) for x in range(args.n)],
        "four_point_delta": lambda k: k.four_point_delta(D),
        "minmax_centers": lambda k: k.minmax_centers(side),
    }
    print(f"n = {len(M.elements)}, best of {args.repeat}")
    if compiled is None:
        print("compiled extension not built; timing numpy only")
    print(f"{'kernel':28s} {'numpy [s]':>11s} {'cython [s]':>11s} {'speedup':>8s}")
    for name, job in jobs.items():
        tp = _best(lambda: job(pure), args.repeat)
        if compiled is None:
            print(f"{name:28s} {tp:11.4f} {'-':>11s} {'-':>8s}")
            continue
        if not _same(job(pure), job(compiled)):
            raise SystemExit(f"{name}: backends disagree")
        tc = _best(lambda: job(compiled), args.repeat)
        print(f"{name:28s} {tp:11.4f} {tc:11.4f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()

"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--k 4] [--repeat 3]

Inputs are the nets the package itself builds for L = K = 1 on [0, 1],
so the timings reflect real workloads.  Results are checked for equality
before timing is reported.
"""
import argparse
import time
from fractions import Fraction

import numpy as np

from approxevt import _kernels_py
from approxevt.funcspace import LipschitzSpaceDesc, plan_net
from approxevt.metric import BoxSpace

try:
    from approxevt import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def workloads(k):
    space = LipschitzSpaceDesc(BoxSpace.interval(0, 1), 1, 1)
    plan = plan_net(space, Fraction(1, k))
    lo, hi, cons = -plan.levels, plan.levels, plan.cons
    n = len(plan.grid)
    count = _kernels_py.lattice_count(lo, hi, cons, 10**12)
    levels = _kernels_py.lattice_fill(lo, hi, cons, count)
    # sample at cell midpoints; rho scaled by 2(n-1) to stay integral
    D = 2 * (n - 1)
    pts = [Fraction(2 * i + 1, 2 * (n - 1)) for i in range(n - 1)]
    lr = np.array([[int(abs(p - g[0]) * D) for g in plan.grid] for p in pts], dtype=np.int64)
    unit = int(plan.delta * D)
    assert unit == plan.delta * D
    ymax = 2 * D
    qa = [1] * len(pts)
    qb = [-D] * len(pts)
    return {
        "lattice_count": lambda m: m.lattice_count(lo, hi, cons, 10**12),
        "mcshane_batch": lambda m: m.mcshane_batch(levels * unit, lr, -ymax, ymax),
        "lattice_min_quad": lambda m: m.lattice_min_quad(lo, hi, cons, lr, unit, -ymax, ymax, qa, qb),
    }, count


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--k", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    jobs, count = workloads(args.k)
    print(f"net size at k={args.k}: {count}")
    if _kernels_c is None:
        print("compiled kernels not built; only the fallback is timed")
    print(f"{'kernel':<18}{'python s':>12}{'cython s':>12}{'speedup':>10}")
    for name, job in jobs.items():
        tp, rp = best_of(lambda: job(_kernels_py), args.repeat)
        if _kernels_c is None:
            print(f"{name:<18}{tp:>12.4f}{'-':>12}{'-':>10}")
            continue
        tc, rc = best_of(lambda: job(_kernels_c), args.repeat)
        if not same(rp, rc):
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:<18}{tp:>12.4f}{tc:>12.4f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()

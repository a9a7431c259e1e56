"""Compare the compiled and numpy backends of the batched dual-root kernel.

Usage: python3 benchmarks/bench_kernels.py [--repeat 50]

The batch shapes mirror the solver call sites: (N, L1) for the waveform
power balls and (N, L2) for the ARIS ellipsoids.
"""
import argparse
import timeit

import numpy as np

from aris_beampattern import _pykernels

try:
    from aris_beampattern import _ckernels
except ImportError:
    _ckernels = None

SHAPES = [(32, 10), (32, 64), (128, 64), (32, 256), (1024, 64)]


def instance(B, L, rng):
    w2 = rng.exponential(size=(B, L))
    curv = rng.exponential(size=(B, L)) * 10.0 ** rng.uniform(-5, -2, size=(B, 1))
    # every row infeasible at eps = 0 so the root search always runs
    budget = 0.3 * np.sum(curv * w2, axis=1)
    return w2, curv, budget


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=50)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    if _ckernels is None:
        print("compiled extension not built; timing the numpy backend only")
    print(f"{'shape':>12} {'python_us':>10} {'cython_us':>10} {'speedup':>8} {'max_rel_diff':>12}")
    for B, L in SHAPES:
        w2, curv, budget = instance(B, L, rng)
        t_py = min(timeit.repeat(lambda: _pykernels.dual_roots(w2, curv, budget),
                                 number=1, repeat=args.repeat)) * 1e6
        eps_py = _pykernels.dual_roots(w2, curv, budget)
        if _ckernels is None:
            print(f"{str((B, L)):>12} {t_py:10.1f} {'-':>10} {'-':>8} {'-':>12}")
            continue
        t_c = min(timeit.repeat(lambda: _ckernels.dual_roots(w2, curv, budget),
                                number=1, repeat=args.repeat)) * 1e6
        eps_c = _ckernels.dual_roots(w2, curv, budget)
        diff = float(np.max(np.abs(eps_c - eps_py) / np.maximum(np.abs(eps_py), 1e-300)))
        print(f"{str((B, L)):>12} {t_py:10.1f} {t_c:10.1f} {t_py / t_c:8.1f} {diff:12.2e}")


if __name__ == "__main__":
    main()

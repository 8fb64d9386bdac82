"""Compare the numba and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat 5] [--solve]

Times one smoothed value/gradient evaluation and one multistart inner
minimisation per problem size, after a warm-up call (so numba compilation is
excluded).  ``--solve`` additionally times a full ``risbis solve`` on the
table1 scenario with each backend in a subprocess.
"""

import argparse
import os
import subprocess
import sys
import tempfile
import time

import numpy as np

from risbis.kernels import numba_impl, numpy_impl

BACKENDS = {"numba": numba_impl, "numpy": numpy_impl}


def problem(rng, n, k, q):
    m = k + q
    F = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
    F /= np.abs(F).sum(axis=1, keepdims=True)
    coef = np.r_[-np.ones(k), np.ones(q)]
    offset = np.r_[np.full(k, -0.5), np.full(q, 0.05)]
    return np.ascontiguousarray(F), coef, offset


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_kernels(repeat):
    rng = np.random.default_rng(0)
    print(f"{'N':>4} {'K+Q':>5} {'kernel':<12} {'numba':>11} {'numpy':>11} {'speedup':>8}")
    for n, k, q in [(16, 2, 17), (64, 2, 17), (256, 2, 63)]:
        F, coef, offset = problem(rng, n, k, q)
        starts = rng.uniform(0, 2 * np.pi, (8, n))
        om = starts[0].copy()
        cases = {
            "value+grad": lambda impl: impl.smoothed_value_grad(om, F, coef, offset, 10.0),
            "multistart": lambda impl: impl.multistart_minimize(starts, F, coef, offset, 10.0,
                                                                1e-2, 2000, 1e-8),
        }
        for name, call in cases.items():
            t = {b: best_of(lambda: call(impl), repeat) for b, impl in BACKENDS.items()}
            print(f"{n:>4} {k + q:>5} {name:<12} {t['numba'] * 1e3:>9.3f}ms "
                  f"{t['numpy'] * 1e3:>9.3f}ms {t['numpy'] / t['numba']:>7.1f}x")


def bench_solve():
    for backend, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, RISBIS_DISABLE_NUMBA=flag)
        with tempfile.TemporaryDirectory() as out:
            cmd = [sys.executable, "-m", "risbis", "solve", "--scenario", "table1", "--out", out]
            subprocess.run(cmd, env=env, check=True, capture_output=True)  # warm caches
            t0 = time.perf_counter()
            subprocess.run(cmd, env=env, check=True, capture_output=True)
            print(f"table1 solve ({backend}): {time.perf_counter() - t0:.2f} s")


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--solve", action="store_true", help="also time an end-to-end solve")
    args = p.parse_args()
    bench_kernels(args.repeat)
    if args.solve:
        bench_solve()


if __name__ == "__main__":
    main()

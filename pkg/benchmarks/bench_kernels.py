"""Benchmark the compiled kernel core against the NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--n 1024] [--repeat 3]

Covers the two hot paths: the K0-family array evaluation and full
right-hand-side evaluations in both nonlinearity modes.
"""

import argparse
import time

import numpy as np

from qgfront import backends, kernel, spectral
from qgfront.grids import MOVING, FrontState, UniformGrid
from qgfront.kernel import QuadratureSpec


def timeit(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_k0(impl, n_points, repeat):
    x = np.random.default_rng(0).uniform(1e-3, 40.0, n_points)
    return timeit(lambda: impl.k0_k0p(x), repeat)


def bench_rhs(impl_name, mode, n, repeat):
    import qgfront.backends as b

    saved = (b.k0v, b.k0pv, b.k0_k0p, b.i0v, b.accumulate_direct,
             b.accumulate_series)
    impl = backends.get_backend(impl_name)
    b.k0v, b.k0pv, b.k0_k0p, b.i0v = impl.k0v, impl.k0pv, impl.k0_k0p, impl.i0v
    b.accumulate_direct = impl.accumulate_direct
    b.accumulate_series = impl.accumulate_series
    try:
        grid = UniformGrid(n, 80.0)
        state = FrontState(grid, 0.01 * np.exp(-grid.x ** 2 / 4.0), frame=MOVING)
        quad = QuadratureSpec()
        kernel.rhs_nonlinear(state, quad, mode=mode)  # warm caches
        return timeit(lambda: kernel.rhs_nonlinear(state, quad, mode=mode), repeat)
    finally:
        (b.k0v, b.k0pv, b.k0_k0p, b.i0v, b.accumulate_direct,
         b.accumulate_series) = saved


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=1024)
    parser.add_argument("--points", type=int, default=400_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    names = backends.backends_available()
    print(f"backends: {', '.join(names)} (active: {backends.IMPL})")
    print(f"\nK0/K0' array evaluation, {args.points} points:")
    times = {}
    for name in names:
        times[name] = bench_k0(backends.get_backend(name), args.points, args.repeat)
        print(f"  {name:10s} {times[name] * 1e3:9.1f} ms")
    if len(times) == 2:
        print(f"  speedup    {times['reference'] / times['fastkern']:9.1f} x")

    for mode in ("direct", "series"):
        print(f"\nrhs_nonlinear ({mode}), N = {args.n}:")
        times = {}
        for name in names:
            times[name] = bench_rhs(name, mode, args.n, args.repeat)
            print(f"  {name:10s} {times[name] * 1e3:9.1f} ms")
        if len(times) == 2:
            print(f"  speedup    {times['reference'] / times['fastkern']:9.1f} x")


if __name__ == "__main__":
    main()

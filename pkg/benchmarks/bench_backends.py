#!/usr/bin/env python3
"""Compare the compiled kernels against the pure-Python fallback.

Run from the repository root:

    python benchmarks/bench_backends.py

Measures raw kernel throughput (scalar quote, profit-grid scan, split-grid
scan) and two end-to-end paths (brute-force arbitrage oracle, n-pool
arbitrage) under both backends.  The pure backend is exercised in-process
via the *_py reference functions, so the numbers isolate kernel cost from
Python dispatch.
"""

import random
import statistics
import time

from ammlab import _kernels
from ammlab.oracle import brute_arb, random_profitable_pair
from ammlab.pool import PoolState


def timeit(fn, repeat=5):
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return min(samples), statistics.median(samples)


def bench_scalar(quote_fn, n=200_000):
    def run():
        acc = 0
        for d in range(1, n):
            acc += quote_fn(10**9, 10**9, d, 997, 1000)
        return acc

    return run


def bench_arb_grid(grid_fn, points=2_000_000):
    def run():
        return grid_fn(10**9, 2 * 10**9, 10**9, 10**9, 997, 1000, 1, points, 1)

    return run


def bench_route_grid(grid_fn, total=2_000_000):
    def run():
        return grid_fn(10**9, 2 * 10**9, 10**9, 10**9, 997, 1000, 0, total, 1, total)

    return run


def bench_brute(n_instances=20, seed=7):
    rng = random.Random(seed)
    pairs = [random_profitable_pair(rng) for _ in range(n_instances)]

    def run():
        for a, b in pairs:
            brute_arb(a, b)

    return run


def main():
    rows = []
    print(f"active backend: {_kernels.BACKEND}")
    if not _kernels.HAVE_SPEEDUPS:
        print("compiled extension unavailable; benchmarking pure only")

    cases = [
        ("quote scalar x200k", bench_scalar(_kernels.quote_out_py),
         bench_scalar(_kernels.quote_out) if _kernels.HAVE_SPEEDUPS else None),
        ("arb grid 2M pts", bench_arb_grid(_kernels.arb_best_on_grid_py),
         bench_arb_grid(_kernels.arb_best_on_grid) if _kernels.HAVE_SPEEDUPS else None),
        ("route grid 2M pts", bench_route_grid(_kernels.route2_best_on_grid_py),
         bench_route_grid(_kernels.route2_best_on_grid) if _kernels.HAVE_SPEEDUPS else None),
    ]
    for name, pure_fn, fast_fn in cases:
        pure_best, _ = timeit(pure_fn, repeat=3)
        if fast_fn is not None:
            fast_best, _ = timeit(fast_fn, repeat=3)
            rows.append((name, pure_best, fast_best, pure_best / fast_best))
        else:
            rows.append((name, pure_best, None, None))

    # End to end: the oracle leans on grid kernels, so the gap carries over.
    brute_fn = bench_brute()
    e2e_best, _ = timeit(brute_fn, repeat=3)
    rows.append((f"brute_arb x20 ({_kernels.BACKEND})", e2e_best, None, None))

    print(f"{'case':<28} {'pure s':>10} {'compiled s':>12} {'speedup':>9}")
    for name, pure, fast, ratio in rows:
        fast_s = f"{fast:.4f}" if fast is not None else "-"
        ratio_s = f"{ratio:.1f}x" if ratio is not None else "-"
        print(f"{name:<28} {pure:>10.4f} {fast_s:>12} {ratio_s:>9}")


if __name__ == "__main__":
    main()

"""Benchmark the hot kernels: pure NumPy vs Numba.

Run with ``python3 benchmarks/bench_kernels.py``.  Each kernel is called once
for warmup (and JIT compilation), then timed over a fixed number of calls.
"""
from __future__ import annotations

import time

import numpy as np

from bbmlab.kernels import numba_impl, numpy_impl


def benchmark_operation(name: str, numpy_fn, numba_fn, iterations: int = 20):
    """Time one kernel in both implementations; returns (numpy_s, numba_s, speedup)."""
    numpy_fn()
    numba_fn()

    start = time.perf_counter()
    for _ in range(iterations):
        numpy_fn()
    numpy_time = (time.perf_counter() - start) / iterations

    start = time.perf_counter()
    for _ in range(iterations):
        numba_fn()
    numba_time = (time.perf_counter() - start) / iterations

    speedup = numpy_time / numba_time
    print(f"\n{name}:")
    print(f"  NumPy:   {numpy_time * 1000:.3f} ms")
    print(f"  Numba:   {numba_time * 1000:.3f} ms")
    print(f"  Speedup: {speedup:.2f}x")
    return numpy_time, numba_time, speedup


def main():
    if numba_impl is None:
        print("numba is not installed; nothing to compare")
        return
    rng = np.random.default_rng(0)
    print("=" * 60)
    print("bbmlab kernel benchmark")
    print("=" * 60)

    n = 1 << 20
    a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    theta = rng.uniform(0, 5, n)
    benchmark_operation("rotate_pair (2^20 modes)",
                        lambda: numpy_impl.rotate_pair(a, b, theta),
                        lambda: numba_impl.rotate_pair(a, b, theta))

    N, m = 128.0, 1024
    xi1 = N + rng.uniform(-0.5, 0.5, m)
    xi2 = -N + rng.uniform(-0.5, 0.5, m)
    ts = np.linspace(0.0625, 1.0, 16)
    tps = ts[:, None] * np.linspace(0.0, 1.0, 16)[None, :]
    benchmark_operation("band_combination_min (1024 x 16 x 16)",
                        lambda: numpy_impl.band_combination_min(xi1, xi2, ts, tps),
                        lambda: numba_impl.band_combination_min(xi1, xi2, ts, tps))

    xi = np.linspace(-8.0, 8.0, 200_001)
    w = np.exp(-xi * xi)
    benchmark_operation("phase_sum (2e5 nodes)",
                        lambda: numpy_impl.phase_sum(xi, w, 1000.0, 0.3),
                        lambda: numba_impl.phase_sum(xi, w, 1000.0, 0.3))

    k = np.arange(2040, 2081, dtype=np.int64)
    ka = np.concatenate([-k[::-1], k])
    ca = rng.standard_normal(ka.size) + 1j * rng.standard_normal(ka.size)
    benchmark_operation("band_convolution (82 x 82 modes)",
                        lambda: numpy_impl.band_convolution(ka, ca, ka, ca, 4200),
                        lambda: numba_impl.band_convolution(ka, ca, ka, ca, 4200))


if __name__ == "__main__":
    main()

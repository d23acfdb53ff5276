#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Runs each hot kernel at a few desk-scale shapes and prints a timing table.
The numba column is absent when numba is not installed.

    python3 benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time

import numpy as np

from spheremix import _kernels


def unit_rows(rng, n, d):
    x = rng.standard_normal((n, d))
    return np.ascontiguousarray(x / np.linalg.norm(x, axis=1)[:, None])


def timeit(fn, *args, repeats=5):
    fn(*args)  # warm-up (JIT compilation for the numba path)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    inv = 1.0 / (2 * 0.3**2)
    cases = {
        "kernel_sums 1000x200 d=10": lambda impl: impl[0](
            unit_rows(rng, 1000, 10), unit_rows(rng, 200, 10), inv, False
        ),
        "kernel_sums 2000x500 d=32": lambda impl: impl[0](
            unit_rows(rng, 2000, 32), unit_rows(rng, 500, 32), inv, False
        ),
        "kernel_total n=20000 d=10": lambda impl: impl[1](
            unit_rows(rng, 20000, 10), unit_rows(rng, 1, 10)[0], inv, False
        ),
        "incremental_mean n=5000 d=10": lambda impl: impl[2](
            unit_rows(rng, 5000, 10), False
        ),
    }
    numpy_impl = (
        _kernels._np_kernel_sums,
        _kernels._np_kernel_total,
        _kernels._np_incremental_mean,
    )
    impls = {"numpy": numpy_impl}
    if _kernels._have_numba:
        impls["numba"] = (
            _kernels._nb_kernel_sums,
            _kernels._nb_kernel_total,
            _kernels._nb_incremental_mean,
        )
    else:
        print("numba not installed; benchmarking the numpy fallback only\n")

    header = f"{'kernel':<32}" + "".join(f"{name:>12}" for name in impls)
    if len(impls) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, runner in cases.items():
        times = {name: timeit(runner, impl) for name, impl in impls.items()}
        row = f"{label:<32}" + "".join(f"{times[name] * 1e3:>10.2f}ms" for name in impls)
        if len(times) == 2:
            row += f"{times['numpy'] / times['numba']:>9.1f}x"
        print(row)
    print(f"\nactive backend for the package: {_kernels.backend()}")


if __name__ == "__main__":
    main()

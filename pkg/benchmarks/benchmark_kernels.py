"""Benchmark the numba-compiled hot loops against the plain NumPy/SciPy path.

Run with: python benchmarks/benchmark_kernels.py
The same comparison is what MEMOSC_NO_NUMBA=1 switches at import time.
"""

import time

import numpy as np

from memosc import _kernels


def time_call(fn, *args, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_rk4():
    args = (_kernels.MODEL_NEW, 0.5, 1.0, 0.0, 1.0, 0.3, 0.0, 2.0, 200_000)
    rows = []
    if _kernels.rk4_damped_numba is not None:
        _kernels.rk4_damped_numba(*args[:-1], 100)  # warm-up / compile
        rows.append(("rk4 (numba)", time_call(_kernels.rk4_damped_numba, *args)))
    rows.append(("rk4 (python)", time_call(_kernels.rk4_damped_python, *args, repeats=1)))
    return "fixed-step RK4, 200k steps", rows


def bench_cn():
    n = 2001
    x = np.linspace(-20.0, 20.0, n)
    psi = np.exp(-(x**2) + 0.5j * x).astype(np.complex128)
    masses = np.full(2000, 1.0)
    args = (psi, x * x, x[1] - x[0], 1e-4, masses, 1.0, 1.0)
    rows = []
    if _kernels.cn_evolve_numba is not None:
        _kernels.cn_evolve_numba(psi, x * x, x[1] - x[0], 1e-4, masses[:5], 1.0, 1.0)
        rows.append(("crank-nicolson (numba)", time_call(_kernels.cn_evolve_numba, *args)))
    rows.append(
        ("crank-nicolson (scipy banded)", time_call(_kernels.cn_evolve_python, *args, repeats=1))
    )
    return "Crank-Nicolson, 2001 points x 2000 steps", rows


def main():
    print(f"active backend: {_kernels.BACKEND}")
    if _kernels.rk4_damped_numba is None:
        print("numba unavailable or disabled; timing the fallback path only\n")
    for title, rows in (bench_rk4(), bench_cn()):
        print(f"\n{title}")
        base = rows[-1][1]
        for name, seconds in rows:
            speedup = base / seconds
            print(f"  {name:32s} {seconds * 1e3:10.2f} ms   x{speedup:.1f} vs fallback")


if __name__ == "__main__":
    main()

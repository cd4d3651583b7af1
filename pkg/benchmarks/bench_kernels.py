"""Compare the compiled and pure-Python integration kernels.

Usage: python benchmarks/bench_kernels.py [--repeats N]

Times the two hot kernels (fixed-step RK4 for the Bloch system, the
Euler-Maruyama stochastic stepper) on representative workloads and checks
that both backends agree to rounding.
"""

import argparse
import math
import time

import numpy as np

from becbohd._kernels import _py_core

try:
    from becbohd._kernels import _core
except ImportError:
    _core = None


def timeit(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def bench_rk4(repeats):
    y0 = np.array([0.0, 30.0, 5.0, 0.0])
    coeffs = np.array([25.0, 0.08, -0.08, 0.02, -1.5, 0.0, 0.01, 50.0])
    args = (y0, coeffs, 1e-4, 200_000, 100, 1e9)
    rows = []
    t_py, (out_py, _) = timeit(lambda: _py_core.rk4_bloch(*args), repeats)
    rows.append(("python", t_py))
    if _core is not None:
        t_cy, (out_cy, _) = timeit(lambda: _core.rk4_bloch(*args), repeats)
        rows.append(("cython", t_cy))
        assert np.max(np.abs(out_py - out_cy)) < 1e-10
    return "rk4_bloch (200k steps)", rows


def bench_sse(repeats):
    dim = 51
    rng = np.random.default_rng(5)
    psi0 = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi0 /= np.linalg.norm(psi0)
    herm = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = 0.5 * (herm + herm.conj().T)
    jxd = np.arange(dim) - 25.0
    dt = 1e-5
    dw = rng.normal(0.0, math.sqrt(dt), size=20_000)
    args = (psi0, h, jxd, 0.01, dt, dw, 100)
    rows = []
    t_py, (psis_py, _, _) = timeit(lambda: _py_core.sse_euler(*args), repeats)
    rows.append(("python", t_py))
    if _core is not None:
        t_cy, (psis_cy, _, _) = timeit(lambda: _core.sse_euler(*args), repeats)
        rows.append(("cython", t_cy))
        assert np.max(np.abs(psis_py - psis_cy)) < 1e-10
    return "sse_euler (dim 51, 20k steps)", rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    if _core is None:
        print("compiled kernel unavailable; timing the fallback only")
    for bench in (bench_rk4, bench_sse):
        name, rows = bench(args.repeats)
        print(name)
        base = dict(rows).get("python")
        for backend, t in rows:
            speedup = f"  ({base / t:.1f}x vs python)" if backend != "python" else ""
            print(f"  {backend:>7}: {t * 1e3:8.2f} ms{speedup}")


if __name__ == "__main__":
    main()

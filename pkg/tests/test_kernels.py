"""Backend parity: the compiled and pure-Python kernels must agree."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest

from becbohd._kernels import _py_core

try:
    from becbohd._kernels import _core
except ImportError:  # pragma: no cover - fallback-only environments
    _core = None

needs_compiled = pytest.mark.skipif(_core is None, reason="compiled kernel unavailable")


@needs_compiled
def test_rk4_bloch_backend_parity():
    rng = np.random.default_rng(7)
    y0 = rng.normal(size=4)
    coeffs = np.array([25.0, 0.08, -0.08, 0.02, -1.5, 0.01, 0.01, 50.0])
    out_py, bad_py = _py_core.rk4_bloch(y0, coeffs, 1e-4, 5000, 10, 1e9)
    out_cy, bad_cy = _core.rk4_bloch(y0, coeffs, 1e-4, 5000, 10, 1e9)
    assert bad_py == bad_cy == 0
    assert np.max(np.abs(out_py - out_cy)) < 1e-10


@needs_compiled
def test_sse_euler_backend_parity():
    rng = np.random.default_rng(11)
    dim = 11
    psi0 = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi0 /= np.linalg.norm(psi0)
    herm = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = 0.5 * (herm + herm.conj().T)
    jxd = np.arange(dim) - 5.0
    dt = 1e-4
    dw = rng.normal(0.0, math.sqrt(dt), size=2000)
    psis_py, jx_py, bad_py = _py_core.sse_euler(psi0, h, jxd, 0.3, dt, dw, 10)
    psis_cy, jx_cy, bad_cy = _core.sse_euler(psi0, h, jxd, 0.3, dt, dw, 10)
    assert bad_py == bad_cy == 0
    assert np.max(np.abs(psis_py - psis_cy)) < 1e-10
    assert np.max(np.abs(jx_py - jx_cy)) < 1e-10


def test_rk4_bloch_norm_cap_abort():
    # an anti-damping term (negative G) blows the norm through the cap
    y0 = np.array([1.0, 0.0, 0.0, 0.0])
    coeffs = np.array([1.0, 0.0, 0.0, 0.0, 0.0, -50.0, 0.0, 0.0])
    out, bad = _py_core.rk4_bloch(y0, coeffs, 1e-2, 1000, 1, 4.0)
    assert bad > 0
    assert out.shape[0] <= bad


def test_sse_euler_sampling_shapes():
    psi0 = np.zeros(3, dtype=complex)
    psi0[0] = 1.0
    h = np.zeros((3, 3), dtype=complex)
    jxd = np.array([-1.0, 0.0, 1.0])
    dw = np.zeros(100)
    psis, jx, bad = _py_core.sse_euler(psi0, h, jxd, 0.0, 1e-3, dw, 10)
    assert bad == 0
    assert psis.shape == (11, 3)
    assert jx.shape == (101,)
    assert np.allclose(jx, -1.0)


def test_env_var_forces_python_backend():
    code = "import becbohd; print(becbohd.KERNEL_BACKEND)"
    env = dict(os.environ, BECBOHD_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env
    )
    assert out.returncode == 0
    assert out.stdout.strip() == "python"

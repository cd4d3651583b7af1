"""Pure-NumPy fallback implementations of the hot integration kernels.

Mirrors ``_core.pyx`` operation for operation (same update ordering) so the
compiled and fallback backends agree to floating-point rounding.  Selected
automatically when the compiled extension is unavailable, or explicitly via
``BECBOHD_PURE_PYTHON=1``.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _bloch_deriv(y, c):
    jx, jy, jz, _ = y
    a, b1, b2, d, e, g, xi_phase, half_n = c
    return np.array(
        [
            a * jy + b1 * jy * jz,
            -a * jx + b2 * jx * jz + e * jz - g * jy,
            d * jy * jx - e * jy - g * jz,
            -xi_phase * (half_n + jx),
        ]
    )


def rk4_bloch(y0, coeffs, dt, n_steps, stride, norm_cap):
    """Fixed-step RK4 of the generalized Bloch + cavity-phase system.

    Parameters are packed as
    ``coeffs = (A, B1, B2, D, E, G, xi_phase, half_n)`` giving

        jx' =  A jy + B1 jy jz
        jy' = -A jx + B2 jx jz + E jz - G jy
        jz' =  D jy jx - E jy - G jz
        ph' = -xi_phase (half_n + jx)

    Returns ``(out, bad_step)`` where ``out`` has shape (n_steps//stride + 1, 4)
    sampled every ``stride`` steps and ``bad_step`` is the 1-based index of the
    first step whose squared Bloch norm exceeded ``norm_cap`` (0 if none).
    """
    y = np.asarray(y0, dtype=float).copy()
    c = np.asarray(coeffs, dtype=float)
    n_samples = n_steps // stride + 1
    out = np.empty((n_samples, 4))
    out[0] = y
    k_out = 1
    for step in range(1, n_steps + 1):
        k1 = _bloch_deriv(y, c)
        k2 = _bloch_deriv(y + 0.5 * dt * k1, c)
        k3 = _bloch_deriv(y + 0.5 * dt * k2, c)
        k4 = _bloch_deriv(y + dt * k3, c)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if y[0] ** 2 + y[1] ** 2 + y[2] ** 2 > norm_cap:
            return out[:k_out], step
        if step % stride == 0:
            out[k_out] = y
            k_out += 1
    return out, 0


def sse_euler(psi0, h, jxd, gamma, dt, dw, stride):
    """Euler-Maruyama step of the normalized diffusive unraveling.

    One step (d_i = jxd_i - <jx>):

        psi <- psi + dt*(-i H psi) + (-dt*(gamma/2)*d^2 + sqrt(gamma)*d*dW) psi

    followed by renormalization.  Returns ``(psis, jx_exp, bad_step)``:
    sampled states every ``stride`` steps, the pre-update <jx> at every step
    plus the final one, and the 1-based index of the first step whose norm
    collapsed below 1e-12 before renormalization (0 if none).
    """
    psi = np.asarray(psi0, dtype=complex).copy()
    h = np.asarray(h, dtype=complex)
    jxd = np.asarray(jxd, dtype=float)
    n_steps = len(dw)
    n_samples = n_steps // stride + 1
    psis = np.empty((n_samples, len(psi)), dtype=complex)
    jx_exp = np.empty(n_steps + 1)
    psis[0] = psi
    k_out = 1
    sg = np.sqrt(gamma)
    for step in range(1, n_steps + 1):
        prob = psi.real**2 + psi.imag**2
        e = float(prob @ jxd)
        jx_exp[step - 1] = e
        d = jxd - e
        psi = psi + dt * (-1j) * (h @ psi) + (-0.5 * gamma * dt * d * d + sg * d * dw[step - 1]) * psi
        nrm = np.sqrt(float(psi.real @ psi.real + psi.imag @ psi.imag))
        if nrm < 1e-12:
            return psis[:k_out], jx_exp[: step + 1], step
        psi = psi / nrm
        if step % stride == 0:
            psis[k_out] = psi
            k_out += 1
    prob = psi.real**2 + psi.imag**2
    jx_exp[n_steps] = float(prob @ jxd)
    return psis, jx_exp, 0

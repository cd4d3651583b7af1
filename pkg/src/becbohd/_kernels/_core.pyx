# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: fixed-step RK4 for the Bloch systems and the
Euler-Maruyama stepper for diffusive homodyne trajectories.

Must stay numerically in lockstep with ``_py_core.py`` (same operation
ordering) so backend choice never changes results beyond rounding.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


cdef inline void _deriv(double jx, double jy, double jz,
                        double a, double b1, double b2, double d,
                        double e, double g, double xi_phase, double half_n,
                        double* out) noexcept nogil:
    out[0] = a * jy + b1 * jy * jz
    out[1] = -a * jx + b2 * jx * jz + e * jz - g * jy
    out[2] = d * jy * jx - e * jy - g * jz
    out[3] = -xi_phase * (half_n + jx)


def rk4_bloch(y0, coeffs, double dt, long n_steps, long stride, double norm_cap):
    """See ``_py_core.rk4_bloch``; identical contract."""
    cdef double[4] y
    cdef double[4] yt
    cdef double[4] k1, k2, k3, k4
    cdef double a, b1, b2, d, e, g, xi_phase, half_n
    cdef long step, k_out, i
    cdef double nrm2

    y0 = np.asarray(y0, dtype=np.float64)
    c = np.asarray(coeffs, dtype=np.float64)
    for i in range(4):
        y[i] = y0[i]
    a, b1, b2, d = c[0], c[1], c[2], c[3]
    e, g, xi_phase, half_n = c[4], c[5], c[6], c[7]

    cdef long n_samples = n_steps // stride + 1
    out_arr = np.empty((n_samples, 4), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for i in range(4):
        out[0, i] = y[i]
    k_out = 1
    for step in range(1, n_steps + 1):
        _deriv(y[0], y[1], y[2], a, b1, b2, d, e, g, xi_phase, half_n, k1)
        for i in range(4):
            yt[i] = y[i] + 0.5 * dt * k1[i]
        _deriv(yt[0], yt[1], yt[2], a, b1, b2, d, e, g, xi_phase, half_n, k2)
        for i in range(4):
            yt[i] = y[i] + 0.5 * dt * k2[i]
        _deriv(yt[0], yt[1], yt[2], a, b1, b2, d, e, g, xi_phase, half_n, k3)
        for i in range(4):
            yt[i] = y[i] + dt * k3[i]
        _deriv(yt[0], yt[1], yt[2], a, b1, b2, d, e, g, xi_phase, half_n, k4)
        for i in range(4):
            y[i] = y[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        nrm2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2]
        if nrm2 > norm_cap:
            return out_arr[:k_out], step
        if step % stride == 0:
            for i in range(4):
                out[k_out, i] = y[i]
            k_out += 1
    return out_arr, 0


def sse_euler(psi0, h, jxd, double gamma, double dt, dw, long stride):
    """See ``_py_core.sse_euler``; identical contract."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] psi = np.array(psi0, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] hm = np.ascontiguousarray(h, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] jd = np.ascontiguousarray(jxd, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dwv = np.ascontiguousarray(dw, dtype=np.float64)

    cdef long n = psi.shape[0]
    cdef long n_steps = dwv.shape[0]
    cdef long n_samples = n_steps // stride + 1
    psis_arr = np.empty((n_samples, n), dtype=np.complex128)
    jx_arr = np.empty(n_steps + 1, dtype=np.float64)
    cdef cnp.complex128_t[:, ::1] psis = psis_arr
    cdef double[::1] jx_exp = jx_arr
    cdef cnp.complex128_t[::1] p = psi
    cdef cnp.complex128_t[:, ::1] hv = hm
    cdef double[::1] jdv = jd
    cdef double[::1] dwvv = dwv

    cdef cnp.ndarray[cnp.complex128_t, ndim=1] work = np.empty(n, dtype=np.complex128)
    cdef cnp.complex128_t[::1] w = work

    cdef long step, i, jj, k_out
    cdef double e, dd, nrm, sg, re, im
    cdef double complex acc, fac

    sg = gamma ** 0.5
    for i in range(n):
        psis[0, i] = p[i]
    k_out = 1
    for step in range(1, n_steps + 1):
        e = 0.0
        for i in range(n):
            re = p[i].real
            im = p[i].imag
            e += (re * re + im * im) * jdv[i]
        jx_exp[step - 1] = e
        # w = H psi
        for i in range(n):
            acc = 0
            for jj in range(n):
                acc += hv[i, jj] * p[jj]
            w[i] = acc
        nrm = 0.0
        for i in range(n):
            dd = jdv[i] - e
            fac = -0.5 * gamma * dt * dd * dd + sg * dd * dwvv[step - 1]
            p[i] = p[i] + dt * (-1j) * w[i] + fac * p[i]
            re = p[i].real
            im = p[i].imag
            nrm += re * re + im * im
        nrm = nrm ** 0.5
        if nrm < 1e-12:
            return psis_arr[:k_out], jx_arr[: step + 1], step
        for i in range(n):
            p[i] = p[i] / nrm
        if step % stride == 0:
            for i in range(n):
                psis[k_out, i] = p[i]
            k_out += 1
    e = 0.0
    for i in range(n):
        re = p[i].real
        im = p[i].imag
        e += (re * re + im * im) * jdv[i]
    jx_exp[n_steps] = e
    return psis_arr, jx_arr, 0

"""Exact fixed-N quantum dynamics in the (N+1)-dimensional Dicke sector.

The two condensate modes map onto a collective spin j = N/2 (Schwinger
representation).  All operators live in the eigenbasis of the population
imbalance J_x, where the continuous-measurement channel is diagonal: the
dephasing dissipator -(Gamma/2)[J_x,[J_x, .]] then simply damps the
coherence (m, m') at rate Gamma (m - m')^2 / 2, and J_x eigenstates are
its exact fixed points.

Provided here: operator construction, the collisional + dispersive
Hamiltonian, SU(2) coherent initial states, an RK4 master-equation solver,
and the diffusive (homodyne) stochastic trajectory unraveling whose
seed-ensemble average reproduces the master equation.  The stochastic form
propagated is the standard norm-preserving diffusive unraveling

    dpsi = [-i H dt - (Gamma/2)(J_x - <J_x>)^2 dt
            + sqrt(Gamma)(J_x - <J_x>) dW] psi    (renormalized each step)

which generates the same trajectory measure as the linear
measurement-record form but with numerically stable norm; the recorded
photocurrent is I(t) = 2 Gamma <J_x>_c + sqrt(Gamma) dW/dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import CavityParams, InvalidParameterError, TrapParams, optical_bohd
from .series import HomodyneRecord, TimeSeries

DIM_CAP = 512


class ResourceLimitError(ValueError):
    """Requested Hilbert-space dimension exceeds the dense-matrix cap."""


class StepSizeError(RuntimeError):
    """State invariants broke during stepping; dt is too large."""


@dataclass(frozen=True)
class SpinOperators:
    """Collective spin matrices in the J_x eigenbasis (m = -j..j ascending)."""

    dim: int
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray
    j2: np.ndarray

    @property
    def j(self) -> float:
        return 0.5 * (self.dim - 1)

    @property
    def m_values(self) -> np.ndarray:
        return np.diag(self.jx).real


@dataclass
class QuantumState:
    """Pure vector or mixed density matrix in the Dicke sector."""

    vector: np.ndarray | None = None
    rho: np.ndarray | None = None

    def __post_init__(self):
        if (self.vector is None) == (self.rho is None):
            raise InvalidParameterError("provide exactly one of vector or rho")

    @classmethod
    def pure(cls, vector: np.ndarray) -> "QuantumState":
        vector = np.asarray(vector, dtype=complex)
        nrm = np.linalg.norm(vector)
        if abs(nrm - 1.0) > 1e-10:
            raise InvalidParameterError(f"pure state norm {nrm} deviates from 1")
        return cls(vector=vector)

    @classmethod
    def mixed(cls, rho: np.ndarray) -> "QuantumState":
        rho = np.asarray(rho, dtype=complex)
        tr = np.trace(rho).real
        if abs(tr - 1.0) > 1e-10:
            raise InvalidParameterError(f"density matrix trace {tr} deviates from 1")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
            raise InvalidParameterError("density matrix is not Hermitian")
        if np.linalg.eigvalsh(rho).min() < -1e-8:
            raise InvalidParameterError("density matrix has a negative eigenvalue")
        return cls(rho=rho)

    @property
    def kind(self) -> str:
        return "pure" if self.vector is not None else "mixed"

    def as_density(self) -> np.ndarray:
        if self.rho is not None:
            return self.rho
        return np.outer(self.vector, self.vector.conj())

    def expect(self, op: np.ndarray) -> float:
        if self.vector is not None:
            return float(np.real(self.vector.conj() @ (op @ self.vector)))
        return float(np.real(np.trace(op @ self.rho)))

    def purity(self) -> float:
        if self.vector is not None:
            return 1.0
        return float(np.real(np.trace(self.rho @ self.rho)))


def build_spin_operators(n_atoms: int, dim_cap: int = DIM_CAP) -> SpinOperators:
    """Spin-j matrices (j = N/2) with J_x diagonal.

    J_y and J_z are built from the ladder operators about the x axis, so
    [jx, jy] = i jz and cyclic permutations hold to machine precision.
    """
    if n_atoms < 1:
        raise InvalidParameterError(f"n_atoms must be >= 1, got {n_atoms}")
    if n_atoms + 1 > dim_cap:
        raise ResourceLimitError(
            f"dimension {n_atoms + 1} exceeds cap {dim_cap}; dense matrices only"
        )
    j = 0.5 * n_atoms
    m = np.arange(n_atoms + 1) - j
    jx = np.diag(m).astype(complex)
    # raising operator about x: <m+1| K+ |m> = sqrt(j(j+1) - m(m+1))
    off = np.sqrt(j * (j + 1.0) - m[:-1] * (m[:-1] + 1.0))
    kp = np.zeros((n_atoms + 1, n_atoms + 1), dtype=complex)
    kp[np.arange(1, n_atoms + 1), np.arange(n_atoms)] = off
    km = kp.conj().T
    jy = 0.5 * (kp + km)
    jz = (kp - km) / 2j
    j2 = jx @ jx + jy @ jy + jz @ jz
    return SpinOperators(dim=n_atoms + 1, jx=jx, jy=jy, jz=jz, j2=j2)


def build_hamiltonian(
    trap: TrapParams,
    ops: SpinOperators,
    xi: float = 0.0,
    n_photons: float = 0.0,
) -> np.ndarray:
    """Collisional Hamiltonian plus the classical dispersive shift:

        H = Omega_0 jz + 4 eta jz^2 + 2 (kappa - eta) jx^2 - xi N_f jx

    (the imbalance-independent -xi N N_f / 2 term is a global phase and is
    dropped; the cavity is undepleted so c^dag c -> N_f).
    """
    h = (
        trap.omega0 * ops.jz
        + 4.0 * trap.eta * (ops.jz @ ops.jz)
        + 2.0 * (trap.kappa - trap.eta) * (ops.jx @ ops.jx)
        - xi * n_photons * ops.jx
    )
    return h


def coherent_spin_state(theta: float, phi: float, ops: SpinOperators) -> QuantumState:
    """SU(2) coherent state polarized along (theta, phi) from the +x axis.

    Expectations: <jx> = j cos(theta), <jy> = j sin(theta) cos(phi),
    <jz> = j sin(theta) sin(phi).  theta = pi/2, phi = 0 is the balanced,
    maximal-momentum state.
    """
    j = ops.j
    m = ops.m_values
    n = ops.dim - 1
    # log-binomial for numerical stability at large N
    lc = np.array(
        [
            math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
            for k in range(n + 1)
        ]
    )
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    logc = math.log(c) if c > 0 else -math.inf
    logs = math.log(s) if s > 0 else -math.inf

    def wlog(w, logv):
        # w * logv with the convention 0 * (-inf) = 0
        if math.isinf(logv):
            return np.where(w == 0, 0.0, -math.inf)
        return w * logv

    logamp = 0.5 * lc + wlog(j + m, logc) + wlog(j - m, logs)
    amp = np.where(np.isfinite(logamp), np.exp(logamp), 0.0).astype(complex)
    amp *= np.exp(1j * (j - m) * phi)
    amp /= np.linalg.norm(amp)
    return QuantumState.pure(amp)


@dataclass
class MasterResult:
    """Master-equation output: expectation series plus sampled states."""

    series: TimeSeries
    states: np.ndarray
    purity: np.ndarray


def _lindblad_rhs(rho: np.ndarray, h: np.ndarray, m: np.ndarray, gamma: float) -> np.ndarray:
    comm = h @ rho - rho @ h
    # jx diagonal: double commutator is an elementwise (m - m')^2 damping
    dm2 = (m[:, None] - m[None, :]) ** 2
    return -1j * comm - 0.5 * gamma * dm2 * rho


def evolve_master(
    rho0: QuantumState,
    h: np.ndarray,
    gamma_meas: float,
    t_span: tuple[float, float],
    dt: float,
    stride: int = 1,
) -> MasterResult:
    """RK4 integration of rho' = -i[H, rho] - (Gamma/2)[jx,[jx, rho]].

    Pure inputs are promoted to density matrices.  Trace, Hermiticity and
    positivity are enforced at every sample; a violation raises
    :class:`StepSizeError` advising a smaller dt.
    """
    if dt <= 0:
        raise InvalidParameterError(f"dt must be > 0, got {dt}")
    dim = h.shape[0]
    ops = build_spin_operators(dim - 1)
    m = ops.m_values
    rho = rho0.as_density().astype(complex)

    t0, t1 = t_span
    n_steps = max(1, int(round((t1 - t0) / dt)))
    if n_steps % stride:
        n_steps += stride - n_steps % stride
    n_samples = n_steps // stride + 1

    times = t0 + dt * stride * np.arange(n_samples)
    states = np.empty((n_samples, dim, dim), dtype=complex)
    ejx = np.empty(n_samples)
    ejy = np.empty(n_samples)
    ejz = np.empty(n_samples)
    purity = np.empty(n_samples)

    def sample(k, rho):
        states[k] = rho
        ejx[k] = np.real(np.sum(m * np.diag(rho)))
        ejy[k] = np.real(np.trace(ops.jy @ rho))
        ejz[k] = np.real(np.trace(ops.jz @ rho))
        purity[k] = np.real(np.trace(rho @ rho))
        tr = np.real(np.trace(rho))
        if abs(tr - 1.0) > 1e-8 or np.max(np.abs(rho - rho.conj().T)) > 1e-8:
            raise StepSizeError(
                f"trace/Hermiticity drift at t = {times[k]:.6g}; reduce dt"
            )
        if np.linalg.eigvalsh(rho).min() < -1e-6:
            raise StepSizeError(f"positivity violated at t = {times[k]:.6g}; reduce dt")

    sample(0, rho)
    k_out = 1
    for step in range(1, n_steps + 1):
        k1 = _lindblad_rhs(rho, h, m, gamma_meas)
        k2 = _lindblad_rhs(rho + 0.5 * dt * k1, h, m, gamma_meas)
        k3 = _lindblad_rhs(rho + 0.5 * dt * k2, h, m, gamma_meas)
        k4 = _lindblad_rhs(rho + dt * k3, h, m, gamma_meas)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step % stride == 0:
            sample(k_out, rho)
            k_out += 1

    series = TimeSeries(
        times,
        ejx,
        ejy,
        ejz,
        meta={"dt": dt, "stride": stride, "gamma_meas": gamma_meas, "dim": dim},
    )
    return MasterResult(series=series, states=states, purity=purity)


def trajectory_seed(master_seed: int, index: int) -> np.random.Generator:
    """Independent per-trajectory RNG stream derived from (master seed, index)."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))


def sse_trajectory(
    psi0: QuantumState,
    h: np.ndarray,
    gamma_meas: float,
    dt: float,
    t_end: float,
    seed: int = 0,
    stride: int = 1,
    dw: np.ndarray | None = None,
) -> tuple[TimeSeries, HomodyneRecord]:
    """One diffusive homodyne trajectory (Euler-Maruyama, normalized form).

    ``dw`` may supply precomputed Wiener increments (variance dt per step);
    otherwise they are drawn from ``default_rng(seed)``.  Identical seed,
    dt and t_end give a bit-identical record.
    """
    if psi0.vector is None:
        raise InvalidParameterError("sse_trajectory requires a pure initial state")
    if gamma_meas < 0:
        raise InvalidParameterError(f"gamma_meas must be >= 0, got {gamma_meas}")
    dim = h.shape[0]
    ops = build_spin_operators(dim - 1)
    m = ops.m_values
    j = ops.j
    if gamma_meas * j * j * dt > 0.1:
        raise InvalidParameterError(
            f"dt = {dt:g} too large: need gamma * j^2 * dt <= 0.1, got "
            f"{gamma_meas * j * j * dt:g}"
        )
    n_steps = max(1, int(round(t_end / dt)))
    if n_steps % stride:
        n_steps += stride - n_steps % stride
    if dw is None:
        rng = np.random.default_rng(seed)
        dw = rng.normal(0.0, math.sqrt(dt), size=n_steps)
    else:
        dw = np.asarray(dw, dtype=float)
        if len(dw) != n_steps:
            raise InvalidParameterError(
                f"dw has length {len(dw)}, expected {n_steps} steps"
            )

    psis, jx_exp, bad_step = _kernels.sse_euler(
        psi0.vector, h, m, gamma_meas, dt, dw, stride
    )
    if bad_step:
        raise StepSizeError(
            f"state norm collapsed at step {bad_step} (t = {bad_step * dt:.6g}); "
            "reduce dt"
        )

    times = dt * stride * np.arange(psis.shape[0])
    ejy = np.real(np.einsum("ki,ij,kj->k", psis.conj(), ops.jy, psis))
    ejz = np.real(np.einsum("ki,ij,kj->k", psis.conj(), ops.jz, psis))
    ejx = np.real(np.einsum("ki,i,ki->k", psis.conj(), m, psis))
    series = TimeSeries(
        times,
        ejx,
        ejy,
        ejz,
        meta={
            "dt": dt,
            "stride": stride,
            "gamma_meas": gamma_meas,
            "seed": seed,
            "dim": dim,
            "backend": _kernels.BACKEND,
        },
    )
    current = 2.0 * gamma_meas * jx_exp[:-1] + math.sqrt(gamma_meas) * dw / dt
    record = HomodyneRecord(
        times=dt * np.arange(n_steps),
        current=current,
        noise_increments=dw,
        seed=seed,
        dt=dt,
        gamma_meas=gamma_meas,
    )
    return series, record


def ensemble_average(records: list[TimeSeries]) -> TimeSeries:
    """Per-sample mean and standard error over a trajectory ensemble.

    Standard errors are carried in ``meta['stderr_jx'|'stderr_jy'|'stderr_jz']``.
    """
    if not records:
        raise InvalidParameterError("ensemble_average needs at least one series")
    t = records[0].times
    for s in records[1:]:
        if len(s.times) != len(t) or not np.allclose(s.times, t, rtol=0, atol=1e-12):
            raise InvalidParameterError("trajectory time grids do not match")
    stacks = {
        name: np.stack([getattr(s, name) for s in records]) for name in ("jx", "jy", "jz")
    }
    n = len(records)
    means = {k: v.mean(axis=0) for k, v in stacks.items()}
    if n > 1:
        errs = {k: v.std(axis=0, ddof=1) / math.sqrt(n) for k, v in stacks.items()}
    else:
        errs = {k: np.zeros_like(t) for k in stacks}
    return TimeSeries(
        t,
        means["jx"],
        means["jy"],
        means["jz"],
        meta={
            "n_trajectories": n,
            "stderr_jx": errs["jx"],
            "stderr_jy": errs["jy"],
            "stderr_jz": errs["jz"],
        },
    )


def conditional_current_via_cavity(
    series: TimeSeries,
    cavity: CavityParams,
    n_atoms: int,
    phase0: float = 0.0,
) -> TimeSeries:
    """Map an <J_x>(t) series to the optical homodyne current.

    Accumulates phi' = -xi (N/2 + <J_x>) trapezoidally along the series and
    applies the balanced-detection relation -|c||d| sin(phi).
    """
    rate = -cavity.xi * (n_atoms / 2.0 + series.jx)
    dt = np.diff(series.times)
    phase = np.empty_like(series.times)
    phase[0] = phase0
    phase[1:] = phase0 + np.cumsum(0.5 * (rate[1:] + rate[:-1]) * dt)
    current = np.array(
        [optical_bohd(p, cavity.cav_amp, cavity.lo_amp) for p in phase]
    )
    return TimeSeries(
        series.times,
        series.jx,
        series.jy,
        series.jz,
        phase=phase,
        current=current,
        meta={**series.meta, "xi": cavity.xi, "n_atoms": n_atoms, "phase0": phase0},
    )

"""Mean-field (factorized) dynamics of the double-well condensate.

The operator equations of motion are closed with the symmetric mean-field
rule <[A,B]_+> -> 2 <A><B>, which turns them into ODEs for the Bloch
triplet (<J_x>, <J_y>, <J_z>).  Four variants are integrated:

``closed``
    Full collisional dynamics, no light.  Exhibits self-trapping for
    strong self-collisions and its suppression as eta -> kappa.
``rabi_limit``
    The eta -> kappa, kappa - eta << Omega' limit: rigid rotation at the
    dressed tunneling frequency Omega'.  Has the analytic solution
    :func:`rabi_analytic`, used as an integration oracle.
``light_coupled``
    Undepleted-cavity coupling (c^dag c -> N_f) plus the cavity phase
    phi' = -xi (N/2 + <J_x>).
``damped_moments``
    Ensemble-averaged measurement back-action: the light-coupled rotation
    damped at Gamma/2 on <J_y> and <J_z>.

Integration is fixed-step classical RK4 (reproducible, no adaptivity) via
the kernel backend; a run aborts if the squared Bloch norm exceeds
j(j+1) by more than 1%.

Sign convention: the operator equations of motion and the closed-form
solutions they are usually quoted with differ by the sense of rotation
(equivalently, by the sign of <J_y>).  This module adopts the convention
of the closed forms, so

    jx' =  Omega' jy,   jy' = -Omega' jx   (Rabi limit)

has the solution jx(t) = jx(0) cos(Omega' t) + jy(0) sin(Omega' t) and the
light-coupled run reproduces the analytic phase trajectory and homodyne
current exactly.  Classically this is a pure relabeling of jy and does not
change any physics (norms, self-trapping, damping rates).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import (
    BlochState,
    CavityParams,
    InvalidParameterError,
    TrapParams,
    derived_rates,
)
from .series import TimeSeries

VARIANTS = ("closed", "rabi_limit", "light_coupled", "damped_moments")


class IntegrationDivergedError(RuntimeError):
    """The Bloch norm blew past its physicality bound during integration."""

    def __init__(self, step: int, t: float):
        self.step = step
        self.t = t
        super().__init__(
            f"integration diverged at step {step} (t = {t:.6g}); reduce dt"
        )


@dataclass(frozen=True)
class MeanfieldVariant:
    """Which equation set to integrate.

    ``double_count_guard`` only affects ``light_coupled``: the printed
    equations carry both Omega' (which already includes the collision shift
    8 kappa <J_z>(0)) and explicit collision terms, double-counting the
    shift when <J_z> stays near its initial value.  With the guard on, the
    bare Omega_0 is used in the derivative instead.  Default is the
    verbatim form.
    """

    tag: str = "closed"
    double_count_guard: bool = False

    def __post_init__(self):
        if self.tag not in VARIANTS:
            raise InvalidParameterError(
                f"unknown variant {self.tag!r}; expected one of {VARIANTS}"
            )


def deriv_closed(state: BlochState, trap: TrapParams) -> BlochState:
    """Right-hand side of the closed collisional system (rates, not a state)."""
    o0 = trap.omega0
    k, e = trap.kappa, trap.eta
    return BlochState(
        jx=o0 * state.jy + 8.0 * e * state.jy * state.jz,
        jy=-o0 * state.jx + 4.0 * (k - 3.0 * e) * state.jz * state.jx,
        jz=-4.0 * (k - e) * state.jy * state.jx,
    )


def deriv_light_coupled(
    state: BlochState,
    phase: float,
    trap: TrapParams,
    cavity: CavityParams,
    guard: bool = False,
    jz0: float | None = None,
) -> tuple[BlochState, float]:
    """Undepleted-cavity rates plus the cavity phase rate.

    ``jz0`` fixes the <J_z>(0) entering Omega'; defaults to the current
    <J_z>.  With ``guard`` the bare Omega_0 is used instead of Omega'.
    """
    if guard:
        a = trap.omega0
    else:
        a = trap.omega0 + 8.0 * trap.kappa * (state.jz if jz0 is None else jz0)
    k = trap.kappa
    xnf = cavity.xi * cavity.n_photons
    dstate = BlochState(
        jx=a * state.jy + 8.0 * k * state.jy * state.jz,
        jy=-a * state.jx - 8.0 * k * state.jx * state.jz - xnf * state.jz,
        jz=xnf * state.jy,
    )
    dphase = -cavity.xi * (trap.n_atoms / 2.0 + state.jx)
    return dstate, dphase


def deriv_damped_moments(
    state: BlochState,
    trap: TrapParams,
    cavity: CavityParams,
    gamma_meas: float,
    jz0: float | None = None,
) -> BlochState:
    """Measurement-damped moment rates (eta -> kappa regime).

    ``jz0`` fixes Omega'; defaults to the current <J_z>.
    """
    a = trap.omega0 + 8.0 * trap.kappa * (state.jz if jz0 is None else jz0)
    xc2 = cavity.xi * cavity.n_photons
    hg = 0.5 * gamma_meas
    return BlochState(
        jx=a * state.jy,
        jy=-a * state.jx - xc2 * state.jz - hg * state.jy,
        jz=xc2 * state.jy - hg * state.jz,
    )


def rabi_analytic(
    jx0: float, jy0: float, omega_prime: float, t: float, jz0: float = 0.0
) -> BlochState:
    """Closed-form rigid rotation in the Rabi limit."""
    c, s = math.cos(omega_prime * t), math.sin(omega_prime * t)
    return BlochState(jx=jx0 * c + jy0 * s, jy=jy0 * c - jx0 * s, jz=jz0)


def atomic_bohd_signal(jy0: float, beta_mag: float, omega_prime: float, t: float) -> float:
    """Imbalance signal |beta| sin(Omega' t) <X_{theta-pi/2}> of the temporal
    beam splitter; identical to ``rabi_analytic(0, jy0, ...).jx``."""
    if beta_mag <= 0:
        raise InvalidParameterError(f"beta_mag must be > 0, got {beta_mag}")
    x_quad = -jy0 / beta_mag
    return -beta_mag * math.sin(omega_prime * t) * x_quad


def _coeffs(
    variant: MeanfieldVariant,
    trap: TrapParams,
    cavity: CavityParams,
    jz0: float,
    gamma_meas: float,
) -> np.ndarray:
    o0 = trap.omega0
    op = o0 + 8.0 * trap.kappa * jz0
    k, e = trap.kappa, trap.eta
    xnf = cavity.xi * cavity.n_photons
    half_n = trap.n_atoms / 2.0
    if variant.tag == "closed":
        c = (o0, 8.0 * e, 4.0 * (k - 3.0 * e), -4.0 * (k - e), 0.0, 0.0)
    elif variant.tag == "rabi_limit":
        c = (op, 0.0, 0.0, 0.0, 0.0, 0.0)
    elif variant.tag == "light_coupled":
        a = o0 if variant.double_count_guard else op
        c = (a, 8.0 * k, -8.0 * k, 0.0, -xnf, 0.0)
    else:  # damped_moments
        c = (op, 0.0, 0.0, 0.0, -xnf, 0.5 * gamma_meas)
    return np.array(c + (cavity.xi, half_n))


def _frequency_scale(c: np.ndarray, j: float) -> float:
    a, b1, b2, d, e, g = c[:6]
    return max(abs(a), abs(b1) * j, abs(b2) * j, abs(d) * j, abs(e), abs(g), 1e-300)


def integrate(
    variant: MeanfieldVariant,
    trap: TrapParams,
    cavity: CavityParams,
    state0: BlochState,
    phase0: float = 0.0,
    t_span: tuple[float, float] = (0.0, 1.0),
    dt: float = 1e-3,
    stride: int = 1,
    gamma_meas: float | None = None,
) -> TimeSeries:
    """Fixed-step RK4 integration of the selected variant.

    ``gamma_meas`` overrides the value derived from the cavity drive (used
    by the damped_moments variant only).  Output is sampled every
    ``stride`` accepted steps; ``meta`` records everything needed to rerun.
    """
    if dt <= 0:
        raise InvalidParameterError(f"dt must be > 0, got {dt}")
    t0, t1 = t_span
    if t1 <= t0:
        raise InvalidParameterError(f"empty t_span {t_span}")
    if stride < 1:
        raise InvalidParameterError(f"stride must be >= 1, got {stride}")

    rates = derived_rates(trap, cavity, state0.jz)
    if gamma_meas is None:
        gamma_meas = rates.gamma_meas
    c = _coeffs(variant, trap, cavity, state0.jz, gamma_meas)
    if dt * _frequency_scale(c, trap.j) > 0.1:
        raise InvalidParameterError(
            f"dt = {dt:g} too large for frequency scale "
            f"{_frequency_scale(c, trap.j):g} (need dt * f <= 0.1)"
        )

    n_steps = max(1, int(round((t1 - t0) / dt)))
    if n_steps % stride:
        n_steps += stride - n_steps % stride
    norm_cap = 1.01 * trap.j * (trap.j + 1.0)
    y0 = np.array([state0.jx, state0.jy, state0.jz, phase0])
    out, bad_step = _kernels.rk4_bloch(y0, c, dt, n_steps, stride, norm_cap)
    if bad_step:
        raise IntegrationDivergedError(bad_step, t0 + bad_step * dt)

    times = t0 + dt * stride * np.arange(out.shape[0])
    meta = {
        "variant": variant.tag,
        "double_count_guard": variant.double_count_guard,
        "dt": dt,
        "stride": stride,
        "t0": t0,
        "t1": t1,
        "gamma_meas": gamma_meas,
        "omega_prime": rates.omega_prime,
        "omega_eff": rates.omega_eff,
        "epsilon": rates.epsilon,
        "backend": _kernels.BACKEND,
        "trap": trap,
        "cavity": cavity,
        "state0": state0,
        "phase0": phase0,
    }
    phase = out[:, 3] if cavity.xi != 0.0 else None
    return TimeSeries(times, out[:, 0], out[:, 1], out[:, 2], phase=phase, meta=meta)


def suggested_dt(
    variant: MeanfieldVariant,
    trap: TrapParams,
    cavity: CavityParams,
    state0: BlochState,
    safety: float = 0.02,
    gamma_meas: float = 0.0,
) -> float:
    """A dt comfortably below the stability guard for this parameter set."""
    c = _coeffs(variant, trap, cavity, state0.jz, gamma_meas)
    return safety / _frequency_scale(c, trap.j)


def selftrap_order_parameter(series: TimeSeries) -> float:
    """Time-average of jx(t)/jx(0): ~1 when self-trapped, ~0 in full Rabi
    oscillation."""
    jx0 = series.jx[0]
    if jx0 == 0.0:
        raise InvalidParameterError(
            "order parameter undefined for jx(0) = 0; start from an imbalance"
        )
    return float(np.mean(series.jx) / jx0)

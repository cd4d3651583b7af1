"""Closed-form evaluation of the small-epsilon expansion.

The light-coupled dynamics admit a perturbative solution in the ratio
eps = kappa / (xi N_f) of collision rate to effective photon coupling.
This module evaluates the zeroth- and first-order imbalance and cavity
phase, the phase -> quadrature inversion, and the analytic homodyne
current.  These serve both as fast predictors and as oracles against the
numerical mean-field route.

Two quirks of the printed closed forms are preserved deliberately:

* The first-order terms carry an explicitly imaginary part for a nominally
  real observable.  The evaluation is done complexly; callers take the
  real part for predictions and may inspect the imaginary magnitude as a
  diagnostic.
* The default zeroth-order quadrature profile is the explicit trajectory
  X0(t) = -(jy0/|beta|) cos(omega t) for an initially balanced condensate
  (jx(0) = 0); with it the zeroth-order imbalance is
  (Omega'/omega) jy0 sin(omega t), which reduces to the pure Rabi solution
  as xi N_f -> 0.  A caller-supplied profile switches to the retarded-time
  form instead.

The denominator 1 + cos^2(2 omega t) lies in [1, 2]; no guard is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .model import DerivedRates, InvalidParameterError, optical_bohd

Profile = Callable[[float], float]


@dataclass(frozen=True)
class PerturbationInputs:
    """Everything the closed forms need.

    ``x_quad_zero`` / ``x_quad_one`` are optional quadrature profiles
    X(t); when ``x_quad_zero`` is None the explicit cos(omega t) profile
    derived from ``jy0`` is used, and a missing ``x_quad_one`` means the
    first-order quadrature is identically zero.
    """

    rates: DerivedRates
    n_atoms: int
    beta_mag: float
    jy0: float
    xi: float = 0.0
    cav_amp: float = 1.0
    lo_amp: float = 1.0
    x_quad_zero: Profile | None = None
    x_quad_one: Profile | None = None

    def __post_init__(self):
        if self.rates.epsilon < 0:
            raise InvalidParameterError(f"epsilon must be >= 0, got {self.rates.epsilon}")

    def x0(self, t: float) -> float:
        if self.x_quad_zero is not None:
            return self.x_quad_zero(t)
        if self.beta_mag <= 0:
            raise InvalidParameterError("beta_mag must be > 0 for the default profile")
        return -(self.jy0 / self.beta_mag) * math.cos(self.rates.omega_eff * t)

    def x1(self, t: float) -> float:
        return self.x_quad_one(t) if self.x_quad_one is not None else 0.0


def jx_zeroth(inp: PerturbationInputs, t: float) -> float:
    """Zeroth-order imbalance <J_x^(0)(t)>."""
    w = inp.rates.omega_eff
    if w <= 0:
        raise InvalidParameterError(f"omega_eff must be > 0, got {w}")
    op = inp.rates.omega_prime
    if inp.x_quad_zero is None:
        return (op / w) * inp.jy0 * math.sin(w * t)
    return (op / w) * inp.beta_mag * inp.x_quad_zero(t - math.pi / (2.0 * w))


def jx_first(inp: PerturbationInputs, t: float) -> complex:
    """First-order imbalance correction (complex; observables take Re)."""
    w = inp.rates.omega_eff
    op = inp.rates.omega_prime
    if w <= 0:
        raise InvalidParameterError(f"omega_eff must be > 0, got {w}")
    if op == 0:
        raise InvalidParameterError("omega_prime must be nonzero at first order")
    den = 1.0 + math.cos(2.0 * w * t) ** 2
    bracket = (
        1.5 * t
        + math.cos(2.0 * w * t) * math.sin(2.0 * w * t) / (4.0 * w)
        - 1j * (3.0 * w / op**2) * math.sin(w * t) ** 2
    )
    return (op * inp.beta_mag / den) * bracket * inp.x1(t)


def jx_full(inp: PerturbationInputs, t: float) -> float:
    """Imbalance to first order: jx_zeroth + eps * Re(jx_first)."""
    eps = inp.rates.epsilon
    if not math.isfinite(eps) or eps == 0.0:
        return jx_zeroth(inp, t)
    return jx_zeroth(inp, t) + eps * jx_first(inp, t).real


def phase_zeroth(inp: PerturbationInputs, t: float) -> float:
    """Zeroth-order cavity phase phi^(0)(t)."""
    w = inp.rates.omega_eff
    if w <= 0:
        raise InvalidParameterError(f"omega_eff must be > 0, got {w}")
    op = inp.rates.omega_prime
    return inp.xi * (
        (op * inp.beta_mag / w**2) * inp.x0(t) - inp.n_atoms * t / 2.0
    )


def phase_first(inp: PerturbationInputs, t: float) -> complex:
    """First-order cavity phase correction (complex)."""
    w = inp.rates.omega_eff
    op = inp.rates.omega_prime
    if w <= 0:
        raise InvalidParameterError(f"omega_eff must be > 0, got {w}")
    if op == 0:
        raise InvalidParameterError("omega_prime must be nonzero at first order")
    den = 1.0 + math.cos(2.0 * w * t) ** 2
    bracket = (
        0.75 * t**2
        + math.sin(2.0 * w * t) ** 2 / (16.0 * w**2)
        - 1j * (3.0 * w / (2.0 * op**2)) * (t - math.sin(w * t) * math.cos(w * t) / w)
    )
    return -inp.xi * (
        inp.n_atoms * t / 2.0 + (op * inp.beta_mag / den) * bracket * inp.x1(t)
    )


def phase_full(inp: PerturbationInputs, t: float) -> float:
    """Cavity phase to first order: phi^(0) + eps * Re(phi^(1))."""
    eps = inp.rates.epsilon
    if not math.isfinite(eps) or eps == 0.0:
        return phase_zeroth(inp, t)
    return phase_zeroth(inp, t) + eps * phase_first(inp, t).real


def quadrature_from_phase(phase: float, t: float, inp: PerturbationInputs) -> float:
    """Invert phi^(0) for the condensate quadrature X^(0)(t)."""
    w = inp.rates.omega_eff
    op = inp.rates.omega_prime
    if op <= 0 or inp.beta_mag <= 0:
        raise InvalidParameterError("omega_prime and beta_mag must be > 0")
    if inp.xi == 0:
        raise InvalidParameterError("xi = 0: phase carries no quadrature information")
    return (w**2 / (op * inp.beta_mag)) * (phase / inp.xi + inp.n_atoms * t / 2.0)


def phase_trajectory(jy0: float, inp: PerturbationInputs, t: float) -> float:
    """Explicit zeroth-order phase for the balanced initial condition:
    phi(t) = -xi ( (Omega'/omega^2) cos(omega t) jy0 + N t / 2 )."""
    w = inp.rates.omega_eff
    if w <= 0:
        raise InvalidParameterError(f"omega_eff must be > 0, got {w}")
    op = inp.rates.omega_prime
    return -inp.xi * ((op / w**2) * math.cos(w * t) * jy0 + inp.n_atoms * t / 2.0)


def homodyne_current_analytic(jy0: float, inp: PerturbationInputs, t: float) -> float:
    """Measured current |c||d| sin[ xi ( (Omega'/omega^2) cos(omega t) jy0
    + N t / 2 ) ]; equals optical_bohd(phase_trajectory(t)) identically."""
    w = inp.rates.omega_eff
    if w <= 0:
        raise InvalidParameterError(f"omega_eff must be > 0, got {w}")
    op = inp.rates.omega_prime
    arg = inp.xi * ((op / w**2) * math.cos(w * t) * jy0 + inp.n_atoms * t / 2.0)
    return inp.cav_amp * inp.lo_amp * math.sin(arg)


def diagnostic_imag_first(inp: PerturbationInputs, t: float) -> tuple[float, float]:
    """Magnitudes of the imaginary parts of the first-order terms, emitted
    as a diagnostic channel rather than silently dropped."""
    return abs(jx_first(inp, t).imag), abs(phase_first(inp, t).imag)


__all__ = [
    "PerturbationInputs",
    "jx_zeroth",
    "jx_first",
    "jx_full",
    "phase_zeroth",
    "phase_first",
    "phase_full",
    "quadrature_from_phase",
    "phase_trajectory",
    "homodyne_current_analytic",
    "diagnostic_imag_first",
    "optical_bohd",
]

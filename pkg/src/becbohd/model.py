"""Physical parameters and the algebraic homodyne identities.

A two-mode condensate in a symmetric double well is described by four
rates: tunneling ``omega`` (Omega), self-collision ``kappa``, and the two
cross-collision rates ``eta`` and ``lam`` (Lambda).  The optical readout
chain adds the dispersive coupling ``xi``, the intracavity photon number
``n_photons``, cavity damping ``gamma``, the coherent drive ``drive`` and
the homodyne amplitudes ``lo_amp`` (local oscillator) and ``cav_amp``.

All rates are angular frequencies in rad/s and hbar = 1 throughout, so a
phase like Omega'*t is directly an angle.  The composite rates that govern
every dynamical regime are collected in :class:`DerivedRates`:

    Omega' = Omega + 2*Lambda*(N-1) + 8*kappa*<J_z>(0)   (dressed tunneling)
    omega  = sqrt(Omega'^2 + xi^2 * N_f^2)               (light-dressed freq.)
    eps    = kappa / (xi * N_f)                          (smallness parameter)
    Gamma  = 16 * xi^2 * drive^2 / gamma^2               (measurement strength)

The functions at the bottom are the pure algebraic identities of balanced
homodyne detection: the imbalance <J_x> read out at a 50:50 time equals
|beta| times the signal-mode quadrature, and the optical photocurrent is
-|c||d| sin(phi) of the accumulated cavity phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class InvalidParameterError(ValueError):
    """A physical parameter violates its validity constraints."""


@dataclass(frozen=True)
class TrapParams:
    """Double-well trap rates (rad/s) and total atom number."""

    omega: float
    kappa: float = 0.0
    eta: float = 0.0
    lam: float = 0.0
    n_atoms: int = 2

    def __post_init__(self):
        errors = []
        if self.n_atoms < 1:
            errors.append(f"n_atoms must be >= 1, got {self.n_atoms}")
        for name in ("omega", "kappa", "eta", "lam"):
            v = getattr(self, name)
            if not math.isfinite(v):
                errors.append(f"{name} must be finite, got {v}")
        if self.kappa < 0:
            errors.append(f"kappa must be >= 0, got {self.kappa}")
        if self.eta < 0:
            errors.append(f"eta must be >= 0, got {self.eta}")
        if errors:
            raise InvalidParameterError("; ".join(errors))

    @property
    def j(self) -> float:
        """Total spin j = N/2."""
        return 0.5 * self.n_atoms

    @property
    def omega0(self) -> float:
        """Bare dressed tunneling Omega + 2*Lambda*(N-1), no collision shift."""
        return self.omega + 2.0 * self.lam * (self.n_atoms - 1)


@dataclass(frozen=True)
class CavityParams:
    """Dispersive cavity readout chain parameters (rates in rad/s)."""

    xi: float = 0.0
    n_photons: float = 0.0
    gamma: float = 0.0
    drive: float = 0.0
    detuning: float = 0.0
    lo_amp: float = 1.0
    cav_amp: float = 1.0

    def __post_init__(self):
        errors = []
        if self.n_photons < 0:
            errors.append(f"n_photons must be >= 0, got {self.n_photons}")
        if self.gamma < 0:
            errors.append(f"gamma must be >= 0, got {self.gamma}")
        if self.lo_amp < 0:
            errors.append(f"lo_amp must be >= 0, got {self.lo_amp}")
        if self.cav_amp < 0:
            errors.append(f"cav_amp must be >= 0, got {self.cav_amp}")
        if errors:
            raise InvalidParameterError("; ".join(errors))


@dataclass(frozen=True)
class DerivedRates:
    """Composite frequencies derived from trap + cavity parameters.

    ``epsilon`` is ``inf`` for closed-system runs (xi * N_f = 0); that is a
    sentinel for "not applicable", not an error.
    """

    omega_prime: float
    omega_eff: float
    epsilon: float
    gamma_meas: float


@dataclass(frozen=True)
class BlochState:
    """Mean-field expectation triplet (<J_x>, <J_y>, <J_z>).

    J_x is the population imbalance and J_z the tunneling coherence (the
    axis naming follows the Schwinger mapping used throughout).
    """

    jx: float
    jy: float
    jz: float

    def norm(self) -> float:
        return math.sqrt(self.jx**2 + self.jy**2 + self.jz**2)


@dataclass(frozen=True)
class CondensateSignal:
    """Local-oscillator mode amplitude/phase and the inferred quadrature."""

    beta_mag: float
    theta: float
    x_quad: float

    def __post_init__(self):
        if self.beta_mag < 0:
            raise InvalidParameterError(f"beta_mag must be >= 0, got {self.beta_mag}")


def derived_rates(trap: TrapParams, cavity: CavityParams, jz0: float) -> DerivedRates:
    """Compute the composite rates for a given initial coherence <J_z>(0).

    Raises :class:`InvalidParameterError` if a measurement strength is
    requested (drive != 0) with an undamped cavity (gamma == 0).
    """
    omega_prime = trap.omega0 + 8.0 * trap.kappa * jz0
    xnf = cavity.xi * cavity.n_photons
    omega_eff = math.hypot(omega_prime, xnf)
    epsilon = trap.kappa / xnf if xnf != 0.0 else math.inf
    if cavity.drive != 0.0 and cavity.gamma == 0.0:
        raise InvalidParameterError(
            "gamma = 0 with a nonzero drive: measurement strength undefined"
        )
    if cavity.gamma == 0.0:
        gamma_meas = 0.0
    else:
        gamma_meas = 16.0 * cavity.xi**2 * cavity.drive**2 / cavity.gamma**2
    return DerivedRates(omega_prime, omega_eff, epsilon, gamma_meas)


def quadrature_from_jy(jy0: float, beta_mag: float) -> float:
    """Signal quadrature <X_{theta-pi/2}> = -<J_y>(0) / |beta|."""
    if beta_mag <= 0:
        raise InvalidParameterError(f"beta_mag must be > 0, got {beta_mag}")
    return -jy0 / beta_mag

def atomic_bohd_invert(jx: float, beta_mag: float) -> float:
    """Quadrature inferred from a measured imbalance: <X> = <J_x> / |beta|."""
    if beta_mag <= 0:
        raise InvalidParameterError(f"beta_mag must be > 0, got {beta_mag}")
    return jx / beta_mag


def optimal_beamsplitter_times(omega_prime: float, n_max: int) -> list[float]:
    """Times t_n = (2n+1) pi / (2 Omega') at which the well barrier acts as
    an ideal 50:50 beam splitter, for n = 0..n_max."""
    if omega_prime <= 0:
        raise InvalidParameterError(f"omega_prime must be > 0, got {omega_prime}")
    if n_max < 0:
        raise InvalidParameterError(f"n_max must be >= 0, got {n_max}")
    return [(2 * n + 1) * math.pi / (2.0 * omega_prime) for n in range(n_max + 1)]


def optical_bohd(phase: float, cav_amp: float = 1.0, lo_amp: float = 1.0) -> float:
    """Balanced photocurrent difference <Jxf> = -|c||d| sin(phase)."""
    return -cav_amp * lo_amp * math.sin(phase)

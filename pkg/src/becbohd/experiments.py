"""Scenario runners: reference figures, the regime map, cross-validation.

Each runner returns plain result objects carrying full parameter echoes in
their ``meta`` so the CLI can serialize reproducible artifacts.  The three
solution routes (perturbative closed forms, mean-field integration, exact
Dicke-sector quantum dynamics) are triangulated in
:func:`cross_validate`.

Scale notes:

* The homodyne-current reference curves use N = 10^4 atoms, fine for the
  analytic and mean-field routes.
* Exact conditional dynamics at N = 10^4 is not feasible with dense
  matrices; the stochastic-trajectory runner keeps the dimensionless
  ratios (measurement strength and cross-collision rate over Omega') and
  runs at desk-scale N (default 10).  The scaling is recorded in the
  output meta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import meanfield, perturbation, quantum
from .model import (
    BlochState,
    CavityParams,
    DerivedRates,
    InvalidParameterError,
    TrapParams,
    derived_rates,
    optical_bohd,
)
from .series import TimeSeries

# Reference parameter set for the analytic homodyne current:
# xi = 0.01, Omega' = 25, omega = 30, N = 10^4; initial momentum
# jy0 = 1667 (large, variant "a") or 0.001 (small, variant "b").
FIG3_XI = 0.01
FIG3_OMEGA_PRIME = 25.0
FIG3_OMEGA_EFF = 30.0
FIG3_N_ATOMS = 10_000
FIG3_JY0 = {"a": 1667.0, "b": 0.001}


@dataclass
class Scenario:
    """A fully serializable run description for cross-validation."""

    name: str
    trap: TrapParams
    cavity: CavityParams
    state0: BlochState
    t_end: float
    dt: float | None = None
    stride: int = 8
    seeds: tuple[int, ...] = ()
    meta: dict[str, Any] = field(default_factory=dict)


def fig3_inputs(variant: str) -> perturbation.PerturbationInputs:
    if variant not in ("a", "b"):
        raise InvalidParameterError(f"variant must be 'a' or 'b', got {variant!r}")
    rates = DerivedRates(
        omega_prime=FIG3_OMEGA_PRIME,
        omega_eff=FIG3_OMEGA_EFF,
        epsilon=0.0,
        gamma_meas=0.0,
    )
    return perturbation.PerturbationInputs(
        rates=rates,
        n_atoms=FIG3_N_ATOMS,
        beta_mag=math.sqrt(FIG3_N_ATOMS / 2.0),
        jy0=FIG3_JY0[variant],
        xi=FIG3_XI,
    )


def run_fig3(variant: str = "a", t_end: float = 1.0, n_samples: int = 2048) -> TimeSeries:
    """Analytic homodyne current for a large (a) or small (b) initial
    momentum; emits phase, current and the zeroth-order imbalance."""
    inp = fig3_inputs(variant)
    jy0 = inp.jy0
    times = np.linspace(0.0, t_end, n_samples)
    phase = np.array([perturbation.phase_trajectory(jy0, inp, t) for t in times])
    current = np.array(
        [perturbation.homodyne_current_analytic(jy0, inp, t) for t in times]
    )
    jx = np.array([perturbation.jx_zeroth(inp, t) for t in times])
    return TimeSeries(
        times,
        jx=jx,
        phase=phase,
        current=current,
        meta={
            "scenario": f"fig3{variant}",
            "route": "perturbative",
            "xi": FIG3_XI,
            "omega_prime": FIG3_OMEGA_PRIME,
            "omega_eff": FIG3_OMEGA_EFF,
            "n_atoms": FIG3_N_ATOMS,
            "jy0": jy0,
            "beta_mag": inp.beta_mag,
            "modulation_period": 2.0 * math.pi / FIG3_OMEGA_EFF,
            "drift_rate": FIG3_XI * FIG3_N_ATOMS / 2.0,
        },
    )


# Damped-moment run, two printed parameterizations that disagree:
# "caption": Gamma/Omega' = 0.0065 and coupling 0.04 * Omega';
# "text":    Gamma/Omega' = 0.0001 and coupling 0.04 * Omega'.
# Neither is declared authoritative; both are emitted side by side.
FIG4_PARAMS = {"caption": 0.0065, "text": 0.0001}


def run_fig4(t_end: float = 2.0, n_samples: int = 2048) -> dict[str, TimeSeries]:
    """Unconditional (ensemble-averaged) homodyne current with measurement
    damping, for both printed parameterizations."""
    out: dict[str, TimeSeries] = {}
    omega_prime = FIG3_OMEGA_PRIME
    trap = TrapParams(omega=omega_prime, n_atoms=FIG3_N_ATOMS)
    cavity = CavityParams(xi=FIG3_XI, n_photons=0.04 * omega_prime / FIG3_XI)
    state0 = BlochState(0.0, FIG3_JY0["a"], 0.0)
    variant = meanfield.MeanfieldVariant("damped_moments")
    for label, ratio in FIG4_PARAMS.items():
        gamma_meas = ratio * omega_prime
        dt = meanfield.suggested_dt(variant, trap, cavity, state0, gamma_meas=gamma_meas)
        stride = max(1, int(round(t_end / dt / n_samples)))
        series = meanfield.integrate(
            variant,
            trap,
            cavity,
            state0,
            t_span=(0.0, t_end),
            dt=dt,
            stride=stride,
            gamma_meas=gamma_meas,
        )
        current = np.array(
            [optical_bohd(p, cavity.cav_amp, cavity.lo_amp) for p in series.phase]
        )
        series.current = current
        series.meta.update(
            {
                "scenario": f"fig4_{label}",
                "parameterization": label,
                "gamma_over_omega_prime": ratio,
                "coupling_over_omega_prime": 0.04,
                "time_unit": "seconds (multiply by omega_prime for normalized axis)",
            }
        )
        out[label] = series
    return out


@dataclass
class Fig5Result:
    trajectories: list[TimeSeries]
    ensemble: TimeSeries
    master: TimeSeries
    meta: dict[str, Any]


def run_fig5(
    n_atoms: int = 10,
    seeds: tuple[int, ...] = tuple(range(8)),
    master_seed: int = 1234,
    t_end: float = 5.0,
    dt: float = 1e-4,
    stride: int = 50,
    gamma_ratio: float = 0.0001,
    eta_ratio: float = 0.04,
    omega_prime: float = 2.5,
) -> Fig5Result:
    """Conditional homodyne current from diffusive trajectories at
    desk-scale N, with the master-equation ensemble overlay.

    The dimensionless ratios Gamma/Omega' and eta/Omega' follow the
    reference conditional run; N and Omega' are scaled down so exact
    dynamics are tractable and the explicit stochastic stepper stays
    well inside its stability region (the Euler step distorts spectral
    weights at a rate ~ (E dt)^2 / 2 per step for eigenenergy E, so
    E^2 dt must stay small against the rates of interest).
    """
    eta = eta_ratio * omega_prime
    trap = TrapParams(omega=omega_prime, kappa=eta, eta=eta, n_atoms=n_atoms)
    cavity = CavityParams(xi=0.01 * omega_prime, n_photons=10.0)
    gamma_meas = gamma_ratio * omega_prime

    ops = quantum.build_spin_operators(n_atoms)
    h = quantum.build_hamiltonian(trap, ops, xi=cavity.xi, n_photons=cavity.n_photons)
    psi0 = quantum.coherent_spin_state(math.pi / 2.0, 0.0, ops)

    trajectories = []
    for i, seed in enumerate(seeds):
        rng = quantum.trajectory_seed(master_seed, i)
        n_steps = max(1, int(round(t_end / dt)))
        if n_steps % stride:
            n_steps += stride - n_steps % stride
        dw = rng.normal(0.0, math.sqrt(dt), size=n_steps)
        series, record = quantum.sse_trajectory(
            psi0, h, gamma_meas, dt, t_end, seed=seed, stride=stride, dw=dw
        )
        series = quantum.conditional_current_via_cavity(series, cavity, n_atoms)
        series.meta.update({"trajectory_index": i, "seed": seed, "master_seed": master_seed})
        trajectories.append(series)

    ensemble = quantum.ensemble_average(trajectories)
    ensemble = quantum.conditional_current_via_cavity(ensemble, cavity, n_atoms)

    rho0 = quantum.QuantumState.mixed(psi0.as_density())
    master = quantum.evolve_master(rho0, h, gamma_meas, (0.0, t_end), dt, stride=stride)
    master_series = quantum.conditional_current_via_cavity(
        master.series, cavity, n_atoms
    )

    meta = {
        "scenario": "fig5",
        "n_atoms": n_atoms,
        "gamma_over_omega_prime": gamma_ratio,
        "eta_over_omega_prime": eta_ratio,
        "omega_prime": omega_prime,
        "gamma_meas": gamma_meas,
        "xi": cavity.xi,
        "n_photons": cavity.n_photons,
        "dt": dt,
        "stride": stride,
        "t_end": t_end,
        "master_seed": master_seed,
        "seeds": tuple(seeds),
        "scaling_note": (
            "dimensionless ratios Gamma/Omega' and eta/Omega' preserved at "
            "desk-scale N; reference curves use N = 10^4"
        ),
    }
    return Fig5Result(trajectories, ensemble, master_series, meta)


DEFAULT_SWEEP_KAPPA_N = (1.0, 2.0, 5.0, 10.0)
DEFAULT_SWEEP_ETA_RATIO = (0.0, 0.25, 0.5, 0.75, 1.0)


def regime_sweep(
    kappa_n_over_omega: tuple[float, ...] = DEFAULT_SWEEP_KAPPA_N,
    eta_over_kappa: tuple[float, ...] = DEFAULT_SWEEP_ETA_RATIO,
    n_atoms: int = 100,
    omega: float = 1.0,
    imbalance: float = 0.9,
    t_end: float = 50.0,
) -> list[dict[str, Any]]:
    """Self-trapping order parameter over a (kappa N / Omega, eta / kappa)
    grid, started from a strongly imbalanced state.

    Rows where eta = kappa show full Rabi oscillation (order ~ 0); strong
    self-collisions without cross-collisions self-trap (order ~ 1).
    Divergent cells are recorded with an ``error`` entry, not raised.
    """
    j = n_atoms / 2.0
    jx0 = imbalance * j
    jz0 = math.sqrt(j * j - jx0 * jx0)
    state0 = BlochState(jx0, 0.0, jz0)
    cavity = CavityParams()
    variant = meanfield.MeanfieldVariant("closed")
    rows = []
    for knw in kappa_n_over_omega:
        kappa = knw * omega / n_atoms
        for ratio in eta_over_kappa:
            trap = TrapParams(
                omega=omega, kappa=kappa, eta=ratio * kappa, n_atoms=n_atoms
            )
            dt = meanfield.suggested_dt(variant, trap, cavity, state0)
            row = {
                "kappa_n_over_omega": knw,
                "eta_over_kappa": ratio,
                "dt": dt,
            }
            try:
                series = meanfield.integrate(
                    variant, trap, cavity, state0, t_span=(0.0, t_end), dt=dt, stride=16
                )
                row["order_parameter"] = meanfield.selftrap_order_parameter(series)
            except meanfield.IntegrationDivergedError as exc:
                row["error"] = str(exc)
            rows.append(row)
    return rows


@dataclass
class ValidationEntry:
    name: str
    max_deviation: float
    tolerance: float | None
    passed: bool | None  # None: informational, not gating

    def describe(self) -> str:
        if self.passed is None:
            return f"INFO {self.name}: max deviation {self.max_deviation:.3e}"
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{verdict} {self.name}: max deviation {self.max_deviation:.3e}"
            f" (tolerance {self.tolerance:.3e})"
        )


@dataclass
class ValidationReport:
    scenario: str
    entries: list[ValidationEntry]

    @property
    def passed(self) -> bool:
        return all(e.passed is not False for e in self.entries)


def default_validation_scenarios() -> list[Scenario]:
    n = 100
    j = n / 2.0
    return [
        Scenario(
            name="rabi_oracle",
            trap=TrapParams(omega=25.0, kappa=0.5, eta=0.5, lam=0.01, n_atoms=n),
            cavity=CavityParams(),
            state0=BlochState(0.3 * j, 0.8 * j, 0.2 * j),
            t_end=2.0,
        ),
        Scenario(
            name="light_coupled_rigid",
            trap=TrapParams(omega=25.0, n_atoms=n),
            cavity=CavityParams(xi=0.01, n_photons=1658.3),
            state0=BlochState(0.0, 0.8 * j, 0.0),
            t_end=2.0,
        ),
        Scenario(
            name="quantum_vs_meanfield",
            trap=TrapParams(omega=25.0, n_atoms=10),
            cavity=CavityParams(),
            state0=BlochState(0.0, 5.0, 0.0),
            t_end=1.0,
            meta={"routes": ("meanfield", "quantum")},
        ),
    ]


def cross_validate(scenario: Scenario) -> ValidationReport:
    """Run a scenario on every applicable route and compare channels.

    Mean-field vs closed-form comparisons gate at 1e-6 * j; the quantum vs
    mean-field comparison is informational (finite-N corrections are
    O(1/N) and expected).
    """
    trap, cavity, state0 = scenario.trap, scenario.cavity, scenario.state0
    j = trap.j
    rates = derived_rates(trap, cavity, state0.jz)
    has_light = cavity.xi * cavity.n_photons != 0.0
    entries: list[ValidationEntry] = []

    variant = meanfield.MeanfieldVariant(
        "light_coupled" if has_light else "closed"
    )
    dt = scenario.dt or meanfield.suggested_dt(variant, trap, cavity, state0, safety=0.005)
    series = meanfield.integrate(
        variant, trap, cavity, state0, t_span=(0.0, scenario.t_end), dt=dt,
        stride=scenario.stride,
    )

    if not has_light and trap.kappa == trap.eta:
        ref = np.array(
            [
                meanfield.rabi_analytic(
                    state0.jx, state0.jy, rates.omega_prime, t, state0.jz
                ).jx
                for t in series.times
            ]
        )
        dev = float(np.max(np.abs(series.jx - ref)))
        entries.append(ValidationEntry("meanfield_vs_rabi_analytic", dev, 1e-6 * j, dev < 1e-6 * j))

    if has_light and trap.kappa == 0.0 and state0.jx == 0.0 and state0.jz == 0.0:
        inp = perturbation.PerturbationInputs(
            rates=rates,
            n_atoms=trap.n_atoms,
            beta_mag=math.sqrt(trap.n_atoms / 2.0),
            jy0=state0.jy,
            xi=cavity.xi,
        )
        ref = np.array([perturbation.jx_zeroth(inp, t) for t in series.times])
        dev = float(np.max(np.abs(series.jx - ref)))
        entries.append(ValidationEntry("meanfield_vs_jx_zeroth", dev, 1e-6 * j, dev < 1e-6 * j))

    if trap.n_atoms <= 60 and not has_light:
        ops = quantum.build_spin_operators(trap.n_atoms)
        theta = math.acos(max(-1.0, min(1.0, state0.jx / j)))
        # The mean-field module uses the solution convention (jy relabeled
        # to -jy relative to the operator equations), so the matching
        # coherent state carries the opposite <J_y>.
        phi = math.atan2(state0.jz, -state0.jy) if (state0.jy, state0.jz) != (0, 0) else 0.0
        psi0 = quantum.coherent_spin_state(theta, phi, ops)
        h = quantum.build_hamiltonian(trap, ops)
        result = quantum.evolve_master(
            quantum.QuantumState.mixed(psi0.as_density()),
            h,
            0.0,
            (0.0, scenario.t_end),
            dt,
            stride=scenario.stride,
        )
        n_cmp = min(len(result.series.jx), len(series.jx))
        dev = float(np.max(np.abs(result.series.jx[:n_cmp] - series.jx[:n_cmp])))
        entries.append(ValidationEntry("quantum_vs_meanfield", dev, None, None))

    if not entries:
        raise InvalidParameterError(
            f"scenario {scenario.name!r} matches no validation route"
        )
    return ValidationReport(scenario.name, entries)

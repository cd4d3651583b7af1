"""Configuration parsing, subcommand dispatch and artifact serialization.

Run configurations are flat ``key = value`` files with sections (INI
style), chosen for diff-friendliness; the canonical field names are the
ones defined by the parameter types: omega, kappa, eta, lambda, n_atoms,
xi, n_photons, gamma, drive, detuning, lo_amp, cav_amp.

Every run emits a CSV (fixed column order ``t,jx,jy,jz,phase,current``,
absent channels omitted) plus a manifest that is itself a valid config
file echoing every parameter, seed and integrator setting, so a run can
be reproduced byte-for-byte from its own manifest.  Floats serialize at
full round-trip precision.  Optional JSON and minimal SVG line plots can
be requested with ``--format``.

Exit codes: 0 success, 1 configuration/validation failure, 2 numerical
failure.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import subprocess
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__, _kernels, experiments, meanfield, perturbation, quantum
from .model import (
    BlochState,
    CavityParams,
    InvalidParameterError,
    TrapParams,
    derived_rates,
)
from .series import HomodyneRecord, TimeSeries

OUT_ENV_VAR = "BECBOHD_OUT"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


class ConfigError(ValueError):
    """Unparseable or invalid run configuration."""


# section -> {key: (type, default)}; defaults of None mean "required".
_SCHEMA: dict[str, dict[str, tuple[type, Any]]] = {
    "scenario": {
        "name": (str, "run"),
        "variant": (str, "closed"),
        "guard": (bool, False),
    },
    "trap": {
        "omega": (float, None),
        "kappa": (float, 0.0),
        "eta": (float, 0.0),
        "lambda": (float, 0.0),
        "n_atoms": (int, None),
    },
    "cavity": {
        "xi": (float, 0.0),
        "n_photons": (float, 0.0),
        "gamma": (float, 0.0),
        "drive": (float, 0.0),
        "detuning": (float, 0.0),
        "lo_amp": (float, 1.0),
        "cav_amp": (float, 1.0),
    },
    "initial": {
        "jx0": (float, 0.0),
        "jy0": (float, 0.0),
        "jz0": (float, 0.0),
        "phase0": (float, 0.0),
        "theta": (float, math.pi / 2.0),
        "phi": (float, 0.0),
    },
    "integration": {
        "dt": (float, 0.0),  # 0 means "choose automatically"
        "t_end": (float, 1.0),
        "stride": (int, 1),
    },
    "output": {
        "seed": (int, 0),
        "trajectories": (int, 1),
    },
}

# extra manifest-only section, accepted and ignored on re-parse
_IGNORED_SECTIONS = ("provenance",)


@dataclass
class RunConfig:
    name: str = "run"
    variant: str = "closed"
    guard: bool = False
    trap: TrapParams = field(default_factory=lambda: TrapParams(omega=1.0, n_atoms=2))
    cavity: CavityParams = field(default_factory=CavityParams)
    jx0: float = 0.0
    jy0: float = 0.0
    jz0: float = 0.0
    phase0: float = 0.0
    theta: float = math.pi / 2.0
    phi: float = 0.0
    dt: float = 0.0
    t_end: float = 1.0
    stride: int = 1
    seed: int = 0
    trajectories: int = 1

    @property
    def state0(self) -> BlochState:
        return BlochState(self.jx0, self.jy0, self.jz0)

    def flat(self) -> dict[str, dict[str, Any]]:
        """Schema-shaped echo of every field (for manifests)."""
        return {
            "scenario": {"name": self.name, "variant": self.variant, "guard": self.guard},
            "trap": {
                "omega": self.trap.omega,
                "kappa": self.trap.kappa,
                "eta": self.trap.eta,
                "lambda": self.trap.lam,
                "n_atoms": self.trap.n_atoms,
            },
            "cavity": {
                "xi": self.cavity.xi,
                "n_photons": self.cavity.n_photons,
                "gamma": self.cavity.gamma,
                "drive": self.cavity.drive,
                "detuning": self.cavity.detuning,
                "lo_amp": self.cavity.lo_amp,
                "cav_amp": self.cavity.cav_amp,
            },
            "initial": {
                "jx0": self.jx0,
                "jy0": self.jy0,
                "jz0": self.jz0,
                "phase0": self.phase0,
                "theta": self.theta,
                "phi": self.phi,
            },
            "integration": {"dt": self.dt, "t_end": self.t_end, "stride": self.stride},
            "output": {"seed": self.seed, "trajectories": self.trajectories},
        }


def _convert(section: str, key: str, raw: str, typ: type):
    try:
        if typ is bool:
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return typ(raw)
    except ValueError:
        raise ConfigError(
            f"[{section}] {key}: cannot parse {raw!r} as {typ.__name__}"
        ) from None


def parse_config(path: str | Path) -> RunConfig:
    """Parse and validate a run configuration file.

    Unknown sections or keys are rejected; every violated constraint is
    reported at once, each naming the offending key.
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"config parse error in {path}: {exc}") from exc

    errors: list[str] = []
    values: dict[str, dict[str, Any]] = {s: {} for s in _SCHEMA}

    for section in parser.sections():
        if section in _IGNORED_SECTIONS:
            continue
        if section not in _SCHEMA:
            errors.append(f"unknown section [{section}]")
            continue
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                errors.append(f"unknown key [{section}] {key}")
                continue
            typ, _ = _SCHEMA[section][key]
            try:
                values[section][key] = _convert(section, key, raw, typ)
            except ConfigError as exc:
                errors.append(str(exc))

    missing = []
    for section, keys in _SCHEMA.items():
        for key, (_, default) in keys.items():
            if key in values[section]:
                continue
            if default is None:
                missing.append(f"[{section}] {key}")
            else:
                values[section][key] = default
    if missing:
        errors.append("missing required keys: " + ", ".join(missing))
    if errors:
        raise ConfigError("; ".join(errors))

    # constraint validation, all-at-once with key names
    v = values
    checks = [
        (v["trap"]["n_atoms"] >= 1, "n_atoms must be >= 1"),
        (v["trap"]["kappa"] >= 0, "kappa must be >= 0"),
        (v["trap"]["eta"] >= 0, "eta must be >= 0"),
        (v["cavity"]["gamma"] >= 0, "gamma must be >= 0"),
        (v["cavity"]["n_photons"] >= 0, "n_photons must be >= 0"),
        (v["cavity"]["lo_amp"] >= 0, "lo_amp must be >= 0"),
        (v["cavity"]["cav_amp"] >= 0, "cav_amp must be >= 0"),
        (v["integration"]["dt"] >= 0, "dt must be >= 0 (0 = automatic)"),
        (v["integration"]["t_end"] > 0, "t_end must be > 0"),
        (v["integration"]["stride"] >= 1, "stride must be >= 1"),
        (v["output"]["trajectories"] >= 1, "trajectories must be >= 1"),
        (
            v["scenario"]["variant"] in meanfield.VARIANTS,
            f"variant must be one of {meanfield.VARIANTS}",
        ),
    ]
    violations = [msg for ok, msg in checks if not ok]
    if violations:
        raise ConfigError("; ".join(violations))

    trap = TrapParams(
        omega=v["trap"]["omega"],
        kappa=v["trap"]["kappa"],
        eta=v["trap"]["eta"],
        lam=v["trap"]["lambda"],
        n_atoms=v["trap"]["n_atoms"],
    )
    cavity = CavityParams(**v["cavity"])
    return RunConfig(
        name=v["scenario"]["name"],
        variant=v["scenario"]["variant"],
        guard=v["scenario"]["guard"],
        trap=trap,
        cavity=cavity,
        **v["initial"],
        **v["integration"],
        **v["output"],
    )


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _version_string() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            cwd=Path(__file__).parent,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except OSError:
        pass
    return f"v{__version__}"


def write_manifest(path: Path, config: RunConfig, extra: dict[str, Any] | None = None):
    lines = []
    for section, keys in config.flat().items():
        lines.append(f"[{section}]")
        for key, value in keys.items():
            lines.append(f"{key} = {_fmt(value)}")
        lines.append("")
    lines.append("[provenance]")
    lines.append(f"version = {_version_string()}")
    lines.append(f"backend = {_kernels.BACKEND}")
    for key, value in (extra or {}).items():
        lines.append(f"{key} = {_fmt(value)}")
    lines.append("")
    path.write_text("\n".join(lines))


def write_csv(path: Path, columns: dict[str, np.ndarray]):
    names = list(columns)
    rows = len(next(iter(columns.values()))) if columns else 0
    with open(path, "w") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(rows):
            fh.write(",".join(repr(float(columns[c][i])) for c in names) + "\n")


def read_csv(path: Path) -> dict[str, np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = [[] for _ in header]
        for line in fh:
            for slot, valstr in zip(data, line.strip().split(",")):
                slot.append(float(valstr))
    return {name: np.array(col) for name, col in zip(header, data)}


def write_json(path: Path, columns: dict[str, np.ndarray], meta: dict[str, Any]):
    payload = {
        "meta": {k: v for k, v in meta.items() if isinstance(v, (str, int, float, bool))},
        "columns": {k: [float(x) for x in v] for k, v in columns.items()},
    }
    path.write_text(json.dumps(payload, indent=1, sort_keys=True))


def write_svg(path: Path, title: str, columns: dict[str, np.ndarray]):
    """Minimal deterministic line plot: one polyline per non-time channel."""
    width, height, margin = 800, 400, 45
    t = columns.get("t")
    channels = {k: v for k, v in columns.items() if k != "t"}
    if t is None or len(t) < 2 or not channels:
        path.write_text(
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">'
            f"<text x='10' y='20'>{title}: no data</text></svg>"
        )
        return
    lo = min(float(np.min(v)) for v in channels.values())
    hi = max(float(np.max(v)) for v in channels.values())
    if hi == lo:
        hi = lo + 1.0
    t0, t1 = float(t[0]), float(t[-1])

    def sx(x):
        return margin + (x - t0) / (t1 - t0) * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - lo) / (hi - lo) * (height - 2 * margin)

    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{margin}" y="20" font-family="sans-serif" font-size="14">{title}</text>',
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}"'
        f' height="{height - 2 * margin}" fill="none" stroke="#888"/>',
    ]
    for i, (name, v) in enumerate(channels.items()):
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(t, v))
        color = palette[i % len(palette)]
        parts.append(f'<polyline fill="none" stroke="{color}" points="{pts}"/>')
        parts.append(
            f'<text x="{margin + 5 + 90 * i}" y="{height - 10}" fill="{color}"'
            f' font-family="sans-serif" font-size="12">{name}</text>'
        )
    parts.append("</svg>")
    path.write_text("\n".join(parts))


def emit_artifacts(
    out_dir: Path,
    name: str,
    columns: dict[str, np.ndarray],
    config: RunConfig,
    formats: list[str],
    extra_manifest: dict[str, Any] | None = None,
) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    csv_path = out_dir / f"{name}.csv"
    write_csv(csv_path, columns)
    written.append(csv_path)
    manifest_path = out_dir / f"{name}.manifest.txt"
    write_manifest(manifest_path, config, extra_manifest)
    written.append(manifest_path)
    if "json" in formats:
        p = out_dir / f"{name}.json"
        write_json(p, columns, extra_manifest or {})
        written.append(p)
    if "svg" in formats:
        p = out_dir / f"{name}.svg"
        write_svg(p, name, columns)
        written.append(p)
    return written


def _series_columns(series: TimeSeries) -> dict[str, np.ndarray]:
    return series.channels()


def _record_columns(record: HomodyneRecord) -> dict[str, np.ndarray]:
    return {"t": record.times, "current": record.current, "dW": record.noise_increments}


def preset_path(name: str) -> Path:
    return Path(__file__).parent / "presets" / f"{name}.cfg"


# ---------------------------------------------------------------- commands


def _auto_dt(config: RunConfig, gamma_meas: float = 0.0) -> float:
    if config.dt > 0:
        return config.dt
    variant = meanfield.MeanfieldVariant(config.variant, config.guard)
    return meanfield.suggested_dt(
        variant, config.trap, config.cavity, config.state0, gamma_meas=gamma_meas
    )


def cmd_meanfield(config: RunConfig, out_dir: Path, formats: list[str]) -> int:
    variant = meanfield.MeanfieldVariant(config.variant, config.guard)
    rates = derived_rates(config.trap, config.cavity, config.jz0)
    dt = _auto_dt(config, rates.gamma_meas)
    series = meanfield.integrate(
        variant,
        config.trap,
        config.cavity,
        config.state0,
        phase0=config.phase0,
        t_span=(0.0, config.t_end),
        dt=dt,
        stride=config.stride,
    )
    extra = {
        "dt_used": dt,
        "omega_prime": rates.omega_prime,
        "omega_eff": rates.omega_eff,
        "epsilon": rates.epsilon,
        "gamma_meas": rates.gamma_meas,
    }
    emit_artifacts(out_dir, config.name, _series_columns(series), config, formats, extra)
    return EXIT_OK


def cmd_perturbative(config: RunConfig, out_dir: Path, formats: list[str]) -> int:
    rates = derived_rates(config.trap, config.cavity, config.jz0)
    inp = perturbation.PerturbationInputs(
        rates=rates,
        n_atoms=config.trap.n_atoms,
        beta_mag=math.sqrt(config.trap.n_atoms / 2.0),
        jy0=config.jy0,
        xi=config.cavity.xi,
        cav_amp=config.cavity.cav_amp,
        lo_amp=config.cavity.lo_amp,
    )
    n_samples = 2048
    times = np.linspace(0.0, config.t_end, n_samples)
    jx = np.array([perturbation.jx_full(inp, t) for t in times])
    phase = np.array([perturbation.phase_trajectory(config.jy0, inp, t) for t in times])
    current = np.array(
        [perturbation.homodyne_current_analytic(config.jy0, inp, t) for t in times]
    )
    series = TimeSeries(times, jx=jx, phase=phase, current=current)
    extra = {"omega_prime": rates.omega_prime, "omega_eff": rates.omega_eff,
             "epsilon": rates.epsilon}
    emit_artifacts(out_dir, config.name, _series_columns(series), config, formats, extra)
    return EXIT_OK


def _quantum_setup(config: RunConfig):
    ops = quantum.build_spin_operators(config.trap.n_atoms)
    h = quantum.build_hamiltonian(
        config.trap, ops, xi=config.cavity.xi, n_photons=config.cavity.n_photons
    )
    psi0 = quantum.coherent_spin_state(config.theta, config.phi, ops)
    rates = derived_rates(config.trap, config.cavity, psi0.expect(ops.jz))
    return ops, h, psi0, rates


def cmd_master(config: RunConfig, out_dir: Path, formats: list[str]) -> int:
    ops, h, psi0, rates = _quantum_setup(config)
    dt = config.dt if config.dt > 0 else 1e-3 / max(1.0, abs(rates.omega_prime))
    result = quantum.evolve_master(
        quantum.QuantumState.mixed(psi0.as_density()),
        h,
        rates.gamma_meas,
        (0.0, config.t_end),
        dt,
        stride=config.stride,
    )
    series = quantum.conditional_current_via_cavity(
        result.series, config.cavity, config.trap.n_atoms, phase0=config.phase0
    )
    extra = {"dt_used": dt, "gamma_meas": rates.gamma_meas}
    emit_artifacts(out_dir, config.name, _series_columns(series), config, formats, extra)
    return EXIT_OK


def cmd_trajectory(config: RunConfig, out_dir: Path, formats: list[str]) -> int:
    ops, h, psi0, rates = _quantum_setup(config)
    dt = config.dt if config.dt > 0 else 1e-3 / max(1.0, abs(rates.omega_prime))
    series, record = quantum.sse_trajectory(
        psi0,
        h,
        rates.gamma_meas,
        dt,
        config.t_end,
        seed=config.seed,
        stride=config.stride,
    )
    series = quantum.conditional_current_via_cavity(
        series, config.cavity, config.trap.n_atoms, phase0=config.phase0
    )
    extra = {"dt_used": dt, "gamma_meas": rates.gamma_meas, "seed": config.seed}
    emit_artifacts(out_dir, config.name, _series_columns(series), config, formats, extra)
    record_cols = _record_columns(record)
    write_csv(out_dir / f"{config.name}.record.csv", record_cols)
    return EXIT_OK


def cmd_fig3(variant: str, out_dir: Path, formats: list[str]) -> int:
    config = parse_config(preset_path(f"fig3{variant}"))
    series = experiments.run_fig3(variant, t_end=config.t_end)
    emit_artifacts(
        out_dir, f"fig3{variant}", _series_columns(series), config, formats, series.meta
    )
    return EXIT_OK


def cmd_fig4(out_dir: Path, formats: list[str]) -> int:
    config = parse_config(preset_path("fig4"))
    for label, series in experiments.run_fig4(t_end=config.t_end).items():
        extra = {
            "parameterization": label,
            "gamma_over_omega_prime": series.meta["gamma_over_omega_prime"],
            "dt_used": series.meta["dt"],
        }
        emit_artifacts(
            out_dir, f"fig4_{label}", _series_columns(series), config, formats, extra
        )
    return EXIT_OK


def cmd_fig5(
    out_dir: Path,
    formats: list[str],
    n_atoms: int,
    trajectories: int,
    seed: int,
) -> int:
    config = parse_config(preset_path("fig5"))
    result = experiments.run_fig5(
        n_atoms=n_atoms, seeds=tuple(range(trajectories)), master_seed=seed
    )
    extra = {k: v for k, v in result.meta.items() if not isinstance(v, tuple)}
    for i, traj in enumerate(result.trajectories):
        emit_artifacts(
            out_dir, f"fig5_traj{i:03d}", _series_columns(traj), config, formats,
            {**extra, "trajectory_index": i},
        )
    emit_artifacts(
        out_dir, "fig5_ensemble", _series_columns(result.ensemble), config, formats, extra
    )
    emit_artifacts(
        out_dir, "fig5_master", _series_columns(result.master), config, formats, extra
    )
    return EXIT_OK


def cmd_sweep(out_dir: Path, formats: list[str]) -> int:
    rows = experiments.regime_sweep()
    columns = {
        "kappa_n_over_omega": np.array([r["kappa_n_over_omega"] for r in rows]),
        "eta_over_kappa": np.array([r["eta_over_kappa"] for r in rows]),
        "order_parameter": np.array([r.get("order_parameter", math.nan) for r in rows]),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(out_dir / "sweep.csv", columns)
    write_manifest(out_dir / "sweep.manifest.txt", RunConfig(name="sweep"), {})
    return EXIT_OK


def cmd_validate(out_dir: Path) -> int:
    ok = True
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    for scenario in experiments.default_validation_scenarios():
        report = experiments.cross_validate(scenario)
        for entry in report.entries:
            line = f"{report.scenario}: {entry.describe()}"
            print(line)
            lines.append(line)
        ok = ok and report.passed
    (out_dir / "validate.txt").write_text("\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_CONFIG


# ---------------------------------------------------------------- dispatch


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="becbohd",
        description="Double-well BEC homodyne-detection simulations",
    )
    parser.add_argument("--version", action="version", version=_version_string())
    sub = parser.add_subparsers(dest="command")

    def add(name, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV_VAR} or ./out)")
        p.add_argument(
            "--format",
            action="append",
            choices=["csv", "json", "svg"],
            default=None,
            help="artifact formats (repeatable; csv always written)",
        )
        return p

    for name in ("meanfield", "perturbative", "master", "trajectory"):
        p = add(name, help=f"run the {name} route from a config file")
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None)

    p = add("fig3", help="analytic homodyne current reference curves")
    p.add_argument("--variant", choices=["a", "b"], default="a")
    add("fig4", help="unconditional damped homodyne current (both parameterizations)")
    p = add("fig5", help="conditional trajectories at desk-scale N")
    p.add_argument("--n-atoms", type=int, default=10)
    p.add_argument("--trajectories", type=int, default=8)
    p.add_argument("--seed", type=int, default=1234)
    add("sweep", help="self-trapping regime map")
    add("validate", help="cross-validate the solution routes on shipped presets")
    return parser


def dispatch(args: argparse.Namespace) -> int:
    out_dir = Path(args.out or os.environ.get(OUT_ENV_VAR, "out"))
    formats = args.format or ["csv"]
    cmd = args.command
    try:
        if cmd in ("meanfield", "perturbative", "master", "trajectory"):
            config = parse_config(args.config)
            if getattr(args, "seed", None) is not None:
                config.seed = args.seed
            fn = {
                "meanfield": cmd_meanfield,
                "perturbative": cmd_perturbative,
                "master": cmd_master,
                "trajectory": cmd_trajectory,
            }[cmd]
            return fn(config, out_dir, formats)
        if cmd == "fig3":
            return cmd_fig3(args.variant, out_dir, formats)
        if cmd == "fig4":
            return cmd_fig4(out_dir, formats)
        if cmd == "fig5":
            return cmd_fig5(out_dir, formats, args.n_atoms, args.trajectories, args.seed)
        if cmd == "sweep":
            return cmd_sweep(out_dir, formats)
        if cmd == "validate":
            return cmd_validate(out_dir)
        raise AssertionError(f"unhandled command {cmd!r}")
    except (ConfigError, InvalidParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (meanfield.IntegrationDivergedError, quantum.StepSizeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; map to the config exit code
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    if args.command is None:
        parser.print_usage()
        return EXIT_CONFIG
    return dispatch(args)


if __name__ == "__main__":
    sys.exit(main())

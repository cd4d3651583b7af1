import math

import numpy as np
import pytest

from becbohd import cli
from becbohd.cli import (
    ConfigError,
    RunConfig,
    parse_config,
    preset_path,
    read_csv,
    write_csv,
    write_manifest,
)

GOOD_CONFIG = """
[scenario]
name = demo
variant = rabi_limit

[trap]
omega = 25.0
kappa = 0.5
eta = 0.5
lambda = 0.01
n_atoms = 100

[initial]
jy0 = 30.0

[integration]
t_end = 0.5
stride = 10
"""


def write_cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_parse_config_values_and_defaults(tmp_path):
    config = parse_config(write_cfg(tmp_path, GOOD_CONFIG))
    assert config.name == "demo"
    assert config.variant == "rabi_limit"
    assert config.trap.omega == 25.0
    assert config.trap.lam == 0.01
    assert config.trap.n_atoms == 100
    assert config.jy0 == 30.0
    assert config.jx0 == 0.0  # default
    assert config.cavity.xi == 0.0  # default
    assert config.stride == 10
    assert config.seed == 0


def test_parse_config_reports_all_errors_at_once(tmp_path):
    bad = """
[trap]
omega = abc
bogus = 1

[nonsense]
x = 1
"""
    with pytest.raises(ConfigError) as exc:
        parse_config(write_cfg(tmp_path, bad))
    msg = str(exc.value)
    assert "omega" in msg and "bogus" in msg and "nonsense" in msg
    assert "n_atoms" in msg  # missing required key also reported


def test_parse_config_constraint_violations(tmp_path):
    bad = """
[trap]
omega = 1.0
n_atoms = 10

[integration]
t_end = -1.0
stride = 0
"""
    with pytest.raises(ConfigError) as exc:
        parse_config(write_cfg(tmp_path, bad))
    msg = str(exc.value)
    assert "t_end" in msg and "stride" in msg


def test_parse_config_missing_file():
    with pytest.raises(ConfigError):
        parse_config("/nonexistent/path.cfg")


def test_manifest_round_trips_through_parser(tmp_path):
    config = parse_config(write_cfg(tmp_path, GOOD_CONFIG))
    manifest = tmp_path / "run.manifest.txt"
    write_manifest(manifest, config, {"dt_used": 1e-3})
    reparsed = parse_config(manifest)  # [provenance] is ignored
    assert reparsed == config


def test_csv_round_trip_preserves_floats(tmp_path):
    cols = {
        "t": np.array([0.0, 0.1, 0.2]),
        "jx": np.array([1.0 / 3.0, -2.7e-15, 1667.0001]),
    }
    p = tmp_path / "data.csv"
    write_csv(p, cols)
    back = read_csv(p)
    assert list(back) == ["t", "jx"]
    assert np.array_equal(back["jx"], cols["jx"])


def test_presets_parse():
    for name in ("fig3a", "fig3b", "fig4", "fig5"):
        config = parse_config(preset_path(name))
        assert config.trap.n_atoms >= 1


def test_meanfield_command_artifacts(tmp_path):
    cfg = write_cfg(tmp_path, GOOD_CONFIG)
    out = tmp_path / "out"
    rc = cli.main(["meanfield", "--config", str(cfg), "--out", str(out),
                   "--format", "json", "--format", "svg"])
    assert rc == 0
    assert (out / "demo.csv").exists()
    assert (out / "demo.manifest.txt").exists()
    assert (out / "demo.json").exists()
    svg = (out / "demo.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg
    cols = read_csv(out / "demo.csv")
    assert list(cols) == ["t", "jx", "jy", "jz"]


def test_cli_exit_code_config_error(tmp_path):
    bad = write_cfg(tmp_path, "[trap]\nomega = nope\n")
    rc = cli.main(["meanfield", "--config", str(bad), "--out", str(tmp_path / "o")])
    assert rc == 1


def test_cli_exit_code_usage_error():
    assert cli.main(["no-such-command"]) == 1
    assert cli.main([]) == 1


def test_cli_exit_code_numerical_failure(tmp_path):
    # an explicitly huge master-equation step breaks the state invariants
    cfg = write_cfg(
        tmp_path,
        """
[trap]
omega = 200.0
n_atoms = 4

[integration]
dt = 0.05
t_end = 10.0
""",
    )
    rc = cli.main(["master", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert rc == 2


def test_out_env_var(tmp_path, monkeypatch):
    cfg = write_cfg(tmp_path, GOOD_CONFIG)
    target = tmp_path / "from_env"
    monkeypatch.setenv(cli.OUT_ENV_VAR, str(target))
    rc = cli.main(["meanfield", "--config", str(cfg)])
    assert rc == 0
    assert (target / "demo.csv").exists()


def test_trajectory_determinism(tmp_path):
    cfg = write_cfg(
        tmp_path,
        """
[scenario]
name = traj

[trap]
omega = 1.0
n_atoms = 10

[cavity]
xi = 0.025
n_photons = 10.0
gamma = 10.0
drive = 0.25

[integration]
t_end = 0.5
dt = 0.001
stride = 10

[output]
seed = 7
""",
    )
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["trajectory", "--config", str(cfg), "--out", str(out_a)]) == 0
    assert cli.main(["trajectory", "--config", str(cfg), "--out", str(out_b)]) == 0
    for name in ("traj.csv", "traj.record.csv", "traj.manifest.txt"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_trajectory_seed_override_changes_output(tmp_path):
    cfg = write_cfg(
        tmp_path,
        """
[scenario]
name = traj

[trap]
omega = 1.0
n_atoms = 6

[cavity]
xi = 0.05
n_photons = 4.0
gamma = 8.0
drive = 0.5

[integration]
t_end = 0.2
dt = 0.001
""",
    )
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["trajectory", "--config", str(cfg), "--out", str(out_a), "--seed", "1"]) == 0
    assert cli.main(["trajectory", "--config", str(cfg), "--out", str(out_b), "--seed", "2"]) == 0
    assert (out_a / "traj.record.csv").read_bytes() != (out_b / "traj.record.csv").read_bytes()


def test_fig3_command(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["fig3", "--variant", "b", "--out", str(out)]) == 0
    cols = read_csv(out / "fig3b.csv")
    assert cols["current"][0] == pytest.approx(2.7777777777777420e-07, abs=1e-15)


def test_sweep_command(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["sweep", "--out", str(out)]) == 0
    cols = read_csv(out / "sweep.csv")
    assert len(cols["order_parameter"]) == 20


def test_validate_command(tmp_path, capsys):
    out = tmp_path / "o"
    assert cli.main(["validate", "--out", str(out)]) == 0
    text = (out / "validate.txt").read_text()
    assert "PASS" in text and "FAIL" not in text


def test_perturbative_command(tmp_path):
    cfg = write_cfg(
        tmp_path,
        """
[scenario]
name = pert

[trap]
omega = 25.0
n_atoms = 10000

[cavity]
xi = 0.01
n_photons = 1658.3123951777

[initial]
jy0 = 1667.0

[integration]
t_end = 1.0
""",
    )
    out = tmp_path / "o"
    assert cli.main(["perturbative", "--config", str(cfg), "--out", str(out)]) == 0
    cols = read_csv(out / "pert.csv")
    assert cols["current"][0] == pytest.approx(0.44668396845065677, abs=1e-9)

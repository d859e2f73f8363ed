import csv

import numpy as np
import pytest

from pmetraj import cli, functional
from pmetraj.config import Config, parse_number
from pmetraj.errors import ConfigurationError

SOLVE_CONFIG = """
# quadratic bump, ten steps
[problem]
m = 2
domain = 0,1
initial_data = paper-quadratic

[discretization]
M = 100
tau = 1/100
t_final = 0.1
A0 = 1.0

[newton]
tol_lambda = 1e-9
max_iter = 60

[output]
dir = {out}
snapshot_every = 5
"""

STUDY_CONFIG = """
[problem]
m = 5/3, 2
initial_data = paper-quadratic

[study]
h_list = 1/10, 1/20
reference_M = 80
t_eval = 0.1

[output]
dir = {out}
"""


def _write(tmp_path, text, **fmt):
    path = tmp_path / "case.cfg"
    path.write_text(text.format(**fmt))
    return str(path)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def test_parse_number_fractions():
    assert parse_number("1/200") == pytest.approx(0.005)
    assert parse_number("5/3") == pytest.approx(5.0 / 3.0)
    assert parse_number(" 2.5e-3 ") == 2.5e-3
    with pytest.raises(ValueError):
        parse_number("abc")


def test_config_tracks_lines(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("[problem]\nm = 2\n\n[discretization]\nM = twenty\n")
    cfg = Config.load(path)
    assert cfg.get_number("problem", "m") == 2.0
    with pytest.raises(ConfigurationError, match=r"c\.cfg:5: discretization\.M"):
        cfg.get_int("discretization", "M")


def test_config_syntax_errors(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("m = 2\n")
    with pytest.raises(ConfigurationError, match="outside any"):
        Config.load(path)
    path.write_text("[problem]\njust words\n")
    with pytest.raises(ConfigurationError, match=r"c\.cfg:2"):
        Config.load(path)
    path.write_text("[problem]\nm = 2\nm = 3\n")
    with pytest.raises(ConfigurationError, match="duplicate key"):
        Config.load(path)


def test_config_unknown_key_rejected(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("[problem]\nm = 2\nmm = 3\n")
    cfg = Config.load(path)
    with pytest.raises(ConfigurationError, match=r"c\.cfg:3: unknown key problem\.mm"):
        cfg.reject_unknown({"problem": {"m"}})


def test_config_missing_key(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("[problem]\nm = 2\n")
    cfg = Config.load(path)
    with pytest.raises(ConfigurationError, match=r"study\.h_list: missing"):
        cfg.get_number_list("study", "h_list")


# ---------------------------------------------------------------------------
# solve command
# ---------------------------------------------------------------------------

def test_cmd_solve_quadratic(tmp_path, capsys):
    out = tmp_path / "out"
    rc = cli.main(["solve", "--config", _write(tmp_path, SOLVE_CONFIG, out=out)])
    assert rc == 0
    assert "steps" in capsys.readouterr().out
    with open(out / "energy.csv") as fh:
        rows = list(csv.reader(fh))[1:]
    energies = [float(r[2]) for r in rows]
    assert len(energies) == 11
    assert all(b <= a for a, b in zip(energies[:-1], energies[1:]))
    assert (out / "snap_0.csv").exists() and (out / "snap_10.csv").exists()


def test_cmd_solve_constant_density_stationary(tmp_path):
    out = tmp_path / "out"
    text = SOLVE_CONFIG.replace("paper-quadratic", "constant:0.7")
    rc = cli.main(["solve", "--config", _write(tmp_path, text, out=out)])
    assert rc == 0
    with open(out / "snap_10.csv") as fh:
        rows = list(csv.reader(fh))[1:]
    X = np.array([float(r[1]) for r in rows])
    x = np.array([float(r[2]) for r in rows])
    f = np.array([float(r[3]) for r in rows])
    assert np.max(np.abs(x - X)) <= 1e-12
    assert np.max(np.abs(f - 0.7)) <= 1e-12


def test_cmd_solve_malformed_config_names_key(tmp_path, capsys):
    text = SOLVE_CONFIG.replace("tau = 1/100", "tau = -1/100")
    rc = cli.main(["solve", "--config", _write(tmp_path, text, out=tmp_path / "o")])
    assert rc == 1
    err = capsys.readouterr().err
    assert "discretization.tau" in err


def test_cmd_solve_env_output_override(tmp_path, monkeypatch):
    env_out = tmp_path / "env-out"
    monkeypatch.setenv("PME_OUTPUT_DIR", str(env_out))
    rc = cli.main(["solve", "--config",
                   _write(tmp_path, SOLVE_CONFIG, out=tmp_path / "ignored")])
    assert rc == 0
    assert (env_out / "energy.csv").exists()
    assert not (tmp_path / "ignored").exists()


# ---------------------------------------------------------------------------
# convergence command
# ---------------------------------------------------------------------------

def test_cmd_convergence_writes_reports(tmp_path, capsys):
    out = tmp_path / "study"
    rc = cli.main(["convergence", "--config", _write(tmp_path, STUDY_CONFIG, out=out)])
    assert rc == 0
    for tag in ("1.66667", "2"):
        with open(out / f"convergence_{tag}.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["h", "tau", "err_f_L2", "order", "err_f_inf", "order",
                           "err_x_L2", "order", "err_x_inf", "order"]
        assert len(rows) == 3
        assert rows[1][3] == ""      # coarsest row carries no order
        assert float(rows[2][3]) != 0.0
        assert (out / f"convergence_{tag}.txt").exists()
    assert "m = 2" in capsys.readouterr().out


def test_cmd_convergence_non_nested_reference(tmp_path, capsys):
    text = STUDY_CONFIG.replace("reference_M = 80", "reference_M = 90")
    rc = cli.main(["convergence", "--config", _write(tmp_path, text, out=tmp_path / "s")])
    assert rc == 1
    assert "does not divide" in capsys.readouterr().err


def test_cmd_convergence_requires_study_section(tmp_path, capsys):
    text = SOLVE_CONFIG  # no [study]
    rc = cli.main(["convergence", "--config",
                   _write(tmp_path, text, out=tmp_path / "s")])
    assert rc == 1
    assert "[study]" in capsys.readouterr().err


def test_cmd_convergence_parallel_jobs(tmp_path):
    out = tmp_path / "study"
    text = STUDY_CONFIG.replace("m = 5/3, 2", "m = 2")
    rc = cli.main(["convergence", "--config", _write(tmp_path, text, out=out),
                   "--jobs", "2"])
    assert rc == 0
    assert (out / "convergence_2.csv").exists()


# ---------------------------------------------------------------------------
# check command
# ---------------------------------------------------------------------------

def test_cmd_check_passes(capsys):
    rc = cli.main(["check", "--seed", "7"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "FAIL" not in out
    assert out.count("PASS") == 8


def test_cmd_check_flipped_sign_is_caught(monkeypatch, capsys):
    original = functional.slope_derivative_W
    monkeypatch.setattr(functional, "slope_derivative_W",
                        lambda y, y0, eps_switch=1e-8: -original(y, y0, eps_switch))
    rc = cli.main(["check", "--seed", "7"])
    out = capsys.readouterr().out
    assert rc == 1
    assert "FAIL" in out and "counterexample" in out

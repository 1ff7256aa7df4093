import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from dqssa.cli import main
from dqssa.delays import delays_at
from dqssa.integrator import SolverConfig, integrate_full
from dqssa.io import (CSV_HEADER, ConfigError, ParseError, UnknownKey, load_config,
                      read_trajectory_csv, write_trajectory_csv)
from dqssa.model import DEFAULT_RATES


def test_simulate_original_csv(tmp_path):
    out = tmp_path / "orig.csv"
    assert main(["simulate", "--system", "original", "--t-end", "2", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    first = np.array(lines[1].split(","), dtype=float)
    np.testing.assert_array_equal(first, [0, 1, 0, 1, 0, 0, 0, 0, 0, 0])
    assert len(lines) == 1 + int(round(2 / 1e-3)) // 10 + 1


def test_csv_round_trip(tmp_path):
    traj = integrate_full(SolverConfig(t_end=3.0))
    path = write_trajectory_csv(traj, tmp_path / "t.csv")
    back = read_trajectory_csv(path)
    np.testing.assert_allclose(back.states, traj.states, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(back.times, traj.times, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("system", ["qss", "dqss-constant"])
def test_simulate_reduced_writes_nine_species(tmp_path, system):
    out = tmp_path / "r.csv"
    assert main(["simulate", "--system", system, "--t-end", "1", "--out", str(out)]) == 0
    assert read_trajectory_csv(out).states.shape[1] == 9


def test_invalid_system_exits_2(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--system", "bogus", "--out", str(tmp_path / "x.csv")])
    assert exc.value.code == 2


def test_nonpositive_dt_exits_2(tmp_path):
    assert main(["simulate", "--system", "qss", "--dt", "0", "--out", str(tmp_path / "x")]) == 2


def test_empty_config_gives_defaults(tmp_path):
    cfg = tmp_path / "empty.cfg"
    cfg.write_text("# nothing here\n\n")
    p, solver = load_config(cfg)
    assert p == DEFAULT_RATES and solver == {}


def test_config_overrides_rate_and_solver(tmp_path):
    cfg = tmp_path / "p.cfg"
    cfg.write_text("delta_MA = 20   # faster mRNA decay\ndt = 2e-3\nmax_iters = 20\n")
    p, solver = load_config(cfg)
    assert p.delta_MA == 20.0
    assert solver == {"dt": 2e-3, "max_iters": 20}
    assert delays_at("simplified", 0.0, 0.0, p=p).tau_MA == pytest.approx(0.05)


@pytest.mark.parametrize("text, error", [
    ("delta_MA = -1\n", ConfigError),
    ("dt = 0\n", ConfigError),
    ("speed = 3\n", UnknownKey),
    ("alpha_A = 50\nalpha_R\n", ParseError),
    ("alpha_A = fast\n", ParseError),
])
def test_bad_config(tmp_path, text, error):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    with pytest.raises(error):
        load_config(cfg)


def test_parse_error_reports_line(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("# header\nalpha_A = 50\noops\n")
    with pytest.raises(ParseError) as exc:
        load_config(cfg)
    assert exc.value.line_no == 3
    assert ":3:" in str(exc.value)


def test_cli_config_errors_exit_4(tmp_path):
    out = str(tmp_path / "x.csv")
    assert main(["simulate", "--system", "qss", "--config", str(tmp_path / "none.cfg"),
                 "--out", out]) == 4
    bad = tmp_path / "bad.cfg"
    bad.write_text("delta_MA = -1\n")
    assert main(["simulate", "--system", "qss", "--config", str(bad), "--out", out]) == 4


def test_config_from_environment(tmp_path, monkeypatch):
    cfg = tmp_path / "env.cfg"
    cfg.write_text("t_end = 0.5\n")
    monkeypatch.setenv("DQSSA_CONFIG", str(cfg))
    out = tmp_path / "x.csv"
    assert main(["simulate", "--system", "qss", "--out", str(out)]) == 0
    assert read_trajectory_csv(out).times[-1] == pytest.approx(0.5)


def test_table1_short_horizon_exits_3(tmp_path, capsys):
    assert main(["table1", "--t-end", "50", "--out", str(tmp_path / "t.csv")]) == 3
    assert "IrregularPeriod" in capsys.readouterr().err


def test_fig1_outputs(tmp_path):
    prefix = tmp_path / "fig"
    assert main(["fig1", "--t-end", "20", "--out", str(prefix), "--format", "svg"]) == 0
    for side in ("left", "right"):
        data = np.loadtxt(f"{prefix}_{side}.csv", delimiter=",", skiprows=1)
        assert data.shape == (int(round(20 / 1e-3)) // 10 + 1, 7)
        ET.parse(f"{prefix}_{side}.svg")


def test_compare_qss_prints_period(tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert main(["compare", "--system", "qss", "--out", str(out)]) == 0
    assert "period 17.9" in capsys.readouterr().out
    row = out.read_text().splitlines()[1].split(",")
    assert float(row[2]) == pytest.approx(17.9, abs=0.3)


@pytest.mark.slow
def test_table1_cli_is_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["table1", "--out", str(a)]) == 0
    assert main(["table1", "--out", str(b)]) == 0
    assert a.read_text() == b.read_text()
    assert (tmp_path / "a.txt").exists()


@pytest.mark.slow
def test_table1_coarser_step(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["table1", "--dt", "2e-3", "--out", str(out)]) == 0
    rows = {r.split(",")[0]: float(r.split(",")[1]) for r in out.read_text().splitlines()[1:]}
    expected = {"original": (25.6, 0.3), "qss": (17.9, 0.3), "dqss-derived": (25.1, 0.4),
                "dqss-simplified": (25.3, 0.4), "dqss-constant": (26.1, 0.4)}
    for name, (value, tol) in expected.items():
        assert rows[name] == pytest.approx(value, abs=tol + 0.1)


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "dqssa.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "table1" in res.stdout

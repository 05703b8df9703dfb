import os
import math
import csv
import json

import numpy as np
import pytest

from main import run_subcommand
from pyFunctions.dheom_solver import kubo_dephasing_coherence
from pyFunctions.rydberg import rabi_population

PRESETS = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "config", "presets")

SR_SLOW_REVERSION = """\
[system]
H0 = 0.5, 0; 0, -0.5
V = 0, 0.5; 0.5, 0
rho0 = 1, 0; 0, 0

[process]
kind = sr
mu = 1.0
gamma = 0.8
c0 = 0.0
c1 = 1.0

[solver]
t_end = 0.5
n_times = 2
"""

SHORT_MONTE_CARLO = """\
[system]
H0 = 0, 0; 0, 0
V = 1, 0; 0, -1
rho0 = 0.5, 0.5; 0.5, 0.5

[process]
kind = ou
mu = 1.0
gamma = 1.5
sigma2 = 0.3

[solver]
t_end = 0.5
n_times = 3

[montecarlo]
trajectories = 64
dt_sde = 1e-3
"""


@pytest.fixture(autouse=True)
def cli_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.setenv("DHEOM_THREADS", "1")
    monkeypatch.delenv("DHEOM_ALLOW_UNSOUND_TRUNCATION", raising=False)


def _table(out):
    body = [line for line in out.splitlines() if line and not line.startswith("#")]
    rows = list(csv.reader(body))
    return rows[0], [[float(x) for x in row] for row in rows[1:]]


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_coherent_sweep_matches_rabi_formula(capsys):
    assert run_subcommand(["rydberg-sweep", "--noise", "none"]) == 0
    header, rows = _table(capsys.readouterr().out)
    assert header == ["delta", "population"]
    assert len(rows) == 121
    deltas, populations = np.array(rows).T
    assert np.max(np.abs(populations - rabi_population(deltas, math.pi / 2, 1.0))) <= 1e-6
    assert populations[60] == pytest.approx(1.0, abs=1e-6)


def test_coherent_sweep_with_weaker_coupling(capsys, tmp_path):
    path = _write(tmp_path, "weak.cfg", "[rydberg]\nnoise = none\nJ0 = 0.5\n")
    assert run_subcommand(["rydberg-sweep", "--config", path]) == 0
    _, rows = _table(capsys.readouterr().out)
    deltas, populations = np.array(rows).T
    assert np.max(np.abs(populations - rabi_population(deltas, 0.5, 1.0))) <= 1e-6
    assert populations[60] == pytest.approx(0.229849, abs=1e-6)


def test_unsound_square_root_exits_with_config_error(capsys, tmp_path):
    path = _write(tmp_path, "sr.cfg", SR_SLOW_REVERSION)
    assert run_subcommand(["simulate", "--config", path]) == 2
    captured = capsys.readouterr()
    assert captured.out == ""
    assert captured.err.strip().splitlines()[-1].startswith("ERROR TruncationUnsound")


def test_unsound_square_root_with_override(capsys, tmp_path):
    path = _write(tmp_path, "sr.cfg", SR_SLOW_REVERSION)
    assert run_subcommand(["simulate", "--config", path, "--allow-unsound-truncation", "--depth", "4"]) == 0
    _, rows = _table(capsys.readouterr().out)
    assert len(rows) == 2


def test_simulate_reproduces_kubo_dephasing(capsys):
    assert run_subcommand(["simulate", "--config", os.path.join(PRESETS, "dephasing_ou.cfg")]) == 0
    header, rows = _table(capsys.readouterr().out)
    assert header[:3] == ["t", "rho_00_re", "rho_00_im"]
    re_col, im_col = header.index("rho_01_re"), header.index("rho_01_im")
    for row in rows[1:]:
        expected = kubo_dephasing_coherence(1.0, 1.5, 0.3, row[0])
        assert abs(complex(row[re_col], row[im_col]) - expected) <= 1e-4 * abs(expected)


def test_output_is_deterministic(capsys):
    argv = ["simulate", "--config", os.path.join(PRESETS, "dephasing_ou.cfg"), "--depth", "8"]
    bodies = []
    for _ in range(2):
        assert run_subcommand(argv) == 0
        out = capsys.readouterr().out
        bodies.append([line for line in out.splitlines() if not line.startswith("#")])
    assert bodies[0] == bodies[1]


def test_output_and_manifest_files(capsys, tmp_path):
    output = str(tmp_path / "rho.csv")
    manifest = str(tmp_path / "manifest.json")
    argv = ["simulate", "--config", os.path.join(PRESETS, "dephasing_ou.cfg"), "--depth", "8",
            "--output", output, "--manifest", manifest]
    assert run_subcommand(argv) == 0
    assert capsys.readouterr().out == ""
    with open(output, encoding="utf-8") as f:
        text = f.read()
    assert text.startswith("# command = simulate")
    with open(manifest, encoding="utf-8") as f:
        data = json.load(f)
    assert data["command"] == "simulate"
    assert len(data["config_hash"]) == 64
    assert data["diagnostics"]["depth"] == 8
    assert "dheom.integrate" in data["wall_times"]


def test_propagator_header(capsys):
    argv = ["propagator", "--config", os.path.join(PRESETS, "dephasing_ou.cfg"), "--depth", "8"]
    assert run_subcommand(argv) == 0
    header, rows = _table(capsys.readouterr().out)
    assert len(header) == 1 + 2 * 16
    assert header[1] == "E_00_re"
    assert len(rows) == 5
    assert rows[0][1::2] == [1.0 if i % 5 == 0 else 0.0 for i in range(16)]


def test_montecarlo_reports_standard_errors(capsys, tmp_path):
    path = _write(tmp_path, "mc.cfg", SHORT_MONTE_CARLO)
    assert run_subcommand(["montecarlo", "--config", path, "--seed", "5"]) == 0
    header, rows = _table(capsys.readouterr().out)
    assert "se_01_re" in header
    assert len(rows) == 3
    assert rows[0][header.index("se_01_re")] == 0.0


def test_unknown_subcommand(capsys):
    assert run_subcommand(["integrate"]) == 2
    assert capsys.readouterr().err.strip().splitlines()[-1].startswith("ERROR ParseError: usage:")


def test_missing_config(capsys):
    assert run_subcommand(["simulate"]) == 2
    assert "--config is required" in capsys.readouterr().err.strip().splitlines()[-1]


def test_rydberg_config_rejected_by_simulate(capsys):
    assert run_subcommand(["simulate", "--config", os.path.join(PRESETS, "rydberg_ou.cfg")]) == 2
    assert capsys.readouterr().err.strip().splitlines()[-1].startswith("ERROR ValidationError")


def test_version(capsys):
    assert run_subcommand(["--version"]) == 0
    assert "1.0.0" in capsys.readouterr().out


@pytest.mark.slow
def test_validate_jacobi(capsys):
    assert run_subcommand(["validate", "--process", "jacobi", "--seed", "7"]) == 0
    captured = capsys.readouterr()
    rows = list(csv.reader(line for line in captured.out.splitlines() if not line.startswith("#")))
    assert rows[0][:2] == ["process", "problem"]
    assert [row[0] for row in rows[1:]] == ["jacobi"] * 5
    assert "speedup" in captured.err

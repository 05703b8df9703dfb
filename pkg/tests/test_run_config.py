import os
import math

import pytest
from numpy.testing import assert_allclose

from config.run_config import canonical_config, config_hash, parse_config, parse_config_text
from models.configs import McConfig, NoiseModel, RydbergConfig, SolverConfig, TruncationMode
from models.process_spec import ProcessKind
from pyFunctions import rydberg
from pyFunctions.errors import (
    InvalidDensityMatrix,
    InvalidParameter,
    ParseError,
    TruncationUnsound,
    ValidationError,
)

PRESETS = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "config", "presets")

SOLVER_TEXT = """\
# two-level problem
[system]
H0 = 0.5, 0.1-0.2j; 0.1+0.2j, -0.5
V = 1, 0; 0, -1
rho0 = 1, 0; 0, 0

[process]
kind = sr
mu = 1.0
gamma = {gamma}
c0 = 0.0
c1 = 1.0

[solver]
t_end = 1.0   # us
n_times = 3
"""


def _solver_text(gamma=1.5):
    return SOLVER_TEXT.format(gamma=gamma)


@pytest.mark.parametrize("name, expected", [
    ("dephasing_ou.cfg", SolverConfig),
    ("dephasing_ou_mc.cfg", McConfig),
    ("rydberg_ou.cfg", RydbergConfig),
    ("rydberg_sr.cfg", RydbergConfig),
    ("rydberg_jacobi.cfg", RydbergConfig),
])
def test_presets_parse(name, expected):
    assert isinstance(parse_config(os.path.join(PRESETS, name)), expected)


def test_jacobi_preset_uses_small_step():
    config = parse_config(os.path.join(PRESETS, "rydberg_jacobi.cfg"))
    assert config.noise is NoiseModel.JACOBI
    assert config.dt == pytest.approx(2.5e-4)
    assert config.detunings.size == 121


@pytest.mark.parametrize("noise", [NoiseModel.OU, NoiseModel.SQUARE_ROOT, NoiseModel.JACOBI])
def test_rydberg_presets_match_built_in_defaults(noise):
    config = parse_config(os.path.join(PRESETS, f"rydberg_{noise.value}.cfg"))
    defaults = rydberg.default_config(noise)
    assert config.J0 == pytest.approx(math.pi / 2)
    assert config.J0 == pytest.approx(defaults.J0)
    assert config.dt == pytest.approx(rydberg.default_dt(noise))
    assert config.process == rydberg.reference_process(noise)


def test_solver_text_values():
    config = parse_config_text(_solver_text())
    assert_allclose(config.H0, [[0.5, 0.1 - 0.2j], [0.1 + 0.2j, -0.5]])
    assert config.process.kind is ProcessKind.SQUARE_ROOT
    assert_allclose(config.t_grid, [0.0, 0.5, 1.0])
    assert config.dt == pytest.approx(1e-3)
    assert config.truncation.mode is TruncationMode.AUTO


def test_unknown_key_reports_line():
    text = _solver_text().replace("n_times = 3", "n_times = 3\nstep = 0.1")
    with pytest.raises(ParseError, match="line 17") as info:
        parse_config_text(text)
    assert info.value.line == 17
    assert "step" in str(info.value)


@pytest.mark.parametrize("text, message", [
    ("[systems]\n", "unknown section"),
    ("mu = 1\n", "outside"),
    ("[process]\nmu = 1\nmu = 2\n", "duplicate key"),
    ("[process]\nmu = one\n", "bad value"),
    ("[process]\nmu\n", "key = value"),
    ("[solver]\n[solver]\n", "duplicate section"),
])
def test_malformed_text(text, message):
    with pytest.raises(ParseError, match=message):
        parse_config_text(text)


def test_missing_file():
    with pytest.raises(ParseError, match="cannot read"):
        parse_config("/nonexistent/run.cfg")


def test_missing_section():
    with pytest.raises(ValidationError, match=r"\[system\]"):
        parse_config_text("[process]\nkind = ou\nmu = 1\ngamma = 1\nsigma2 = 1\n[solver]\nt_end = 1\n")


def test_unsound_square_root_rejected():
    with pytest.raises(TruncationUnsound):
        parse_config_text(_solver_text(gamma=0.8))


def test_unsound_square_root_with_override():
    assert parse_config_text(_solver_text(gamma=0.8), allow_unsound_truncation=True).process.allow_unsound_truncation
    in_file = _solver_text(gamma=0.8).replace("c1 = 1.0", "c1 = 1.0\nallow_unsound_truncation = true")
    assert parse_config_text(in_file).process.allow_unsound_truncation


def test_depth_override_fixes_truncation():
    config = parse_config_text(_solver_text(), depth=12)
    assert config.truncation.mode is TruncationMode.FIXED
    assert config.truncation.depth == 12


def test_fixed_truncation_needs_depth():
    with pytest.raises(ValidationError, match="depth"):
        parse_config_text(_solver_text() + "truncation = fixed\n")


def test_unknown_stepper():
    with pytest.raises(InvalidParameter, match="stepper"):
        parse_config_text(_solver_text() + "stepper = euler\n")


def test_seed_override_and_montecarlo_section():
    config = parse_config_text(_solver_text() + "\n[montecarlo]\ntrajectories = 50\nseed = 4\n", seed=99)
    assert isinstance(config, McConfig)
    assert config.trajectories == 50
    assert config.seed == 99


def test_rydberg_noise_must_match_process():
    text = "[process]\nkind = ou\nmu = 1\ngamma = 1.5\nsigma2 = 0.3\n[rydberg]\nnoise = jacobi\n"
    with pytest.raises(InvalidParameter, match="disagrees"):
        parse_config_text(text)


def test_rydberg_explicit_detunings():
    config = parse_config_text("[rydberg]\nnoise = none\ndetunings = 0, 1.5, -2\n")
    assert_allclose(config.detunings, [0.0, 1.5, -2.0])
    assert config.noise is NoiseModel.NONE
    assert config.dt is None


@pytest.mark.parametrize("text", [
    _solver_text(),
    _solver_text().replace("t_end = 1.0   # us\nn_times = 3\n", "times = 0, 0.25, 1\nmax_depth = 64\n"),
    _solver_text() + "\n[montecarlo]\ntrajectories = 50\nboundary_mode = clamp\n",
    "[rydberg]\nnoise = jacobi\ndetunings = 0, 1.5, -2\n[solver]\ndt = 2.5e-4\ndepth = 8\n",
])
def test_canonical_text_round_trips(text):
    config = parse_config_text(text)
    again = parse_config_text(canonical_config(config))
    assert config_hash(again) == config_hash(config)
    assert canonical_config(again) == canonical_config(config)


def test_hash_changes_with_parameters():
    assert config_hash(parse_config_text(_solver_text(1.5))) != config_hash(parse_config_text(_solver_text(2.0)))


def test_invalid_density_matrix_in_file():
    text = _solver_text().replace("rho0 = 1, 0; 0, 0", "rho0 = 1, 0; 0, 1")
    with pytest.raises(InvalidDensityMatrix, match="trace"):
        parse_config_text(text)

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from models.configs import NoiseModel
from models.process_spec import ProcessSpec
from pyFunctions import rydberg
from pyFunctions.errors import InvalidParameter, PopulationOutOfRange
from pyFunctions.parallel import resolve_workers
from pyFunctions.quantum_core import pauli
from pyFunctions.rydberg import SweepMethod


def test_hamiltonians():
    H0, V = rydberg.build_hamiltonians(2.0, 0.5)
    assert_allclose(H0, 2.0 * pauli("z"))
    assert_allclose(V, 0.5 * pauli("x"))


def test_initial_state_is_first_pair_state():
    assert_allclose(rydberg.initial_state(), np.diag([1.0, 0.0]))


def test_transfer_population_clips_rounding():
    assert rydberg.transfer_population(np.diag([0.0, 1.0 + 1e-9])) == 1.0
    assert rydberg.transfer_population(np.diag([1.0, -1e-9])) == 0.0
    assert rydberg.transfer_population(np.diag([0.7, 0.3])) == pytest.approx(0.3)


def test_transfer_population_out_of_range():
    with pytest.raises(PopulationOutOfRange):
        rydberg.transfer_population(np.diag([-0.1, 1.1]))


def test_rabi_values():
    assert rydberg.rabi_population(0.0, 0.5, 1.0) == pytest.approx(0.229848847065930, abs=1e-12)
    assert rydberg.rabi_population(2.0, 0.5, 1.0) == pytest.approx(0.04576, abs=1e-5)
    assert rydberg.rabi_population(0.0, math.pi / 2, 1.0) == pytest.approx(1.0, abs=1e-12)
    values = rydberg.rabi_population(np.array([-1.0, 1.0]), 0.5, 1.0)
    assert values[0] == values[1]


def test_total_variation():
    assert rydberg.total_variation([0.0, 1.0, 0.5]) == pytest.approx(1.5)


def test_sweep_defaults():
    assert rydberg.reference_process(NoiseModel.NONE) is None
    assert rydberg.reference_process(NoiseModel.OU) == ProcessSpec.ou(mu=1.0, gamma=1.5, sigma2=0.3)
    assert rydberg.reference_process(NoiseModel.JACOBI).omega2 == 8.0
    assert rydberg.default_dt(NoiseModel.JACOBI) == pytest.approx(2.5e-4)
    config = rydberg.default_config()
    assert config.detunings.size == 121
    assert config.J0 == pytest.approx(math.pi / 2)
    assert rydberg.default_dt(NoiseModel.OU) == pytest.approx(5e-4)
    assert rydberg.default_dt(NoiseModel.SQUARE_ROOT) == pytest.approx(5e-4)


def test_sweep_method_parse():
    assert SweepMethod.parse("MonteCarlo") is SweepMethod.MONTE_CARLO
    with pytest.raises(InvalidParameter):
        SweepMethod.parse("exact")


def test_solver_config_needs_a_process():
    with pytest.raises(InvalidParameter):
        rydberg.solver_config(rydberg.default_config(NoiseModel.NONE), 0.0)


def test_solver_config_uses_per_noise_step():
    solver = rydberg.solver_config(rydberg.default_config(NoiseModel.JACOBI), 1.0)
    assert solver.dt == pytest.approx(2.5e-4)
    assert_allclose(solver.t_grid, [0.0, 1.0])
    explicit = rydberg.solver_config(rydberg.default_config(NoiseModel.JACOBI, dt=1e-4), 1.0)
    assert explicit.dt == pytest.approx(1e-4)


def test_coherent_sweep_matches_rabi_formula():
    config = rydberg.default_config(NoiseModel.NONE)
    result = rydberg.sweep(config, SweepMethod.COHERENT)
    assert_allclose(result.populations, rydberg.rabi_population(result.deltas, config.J0, config.T), atol=1e-6)
    assert_allclose(result.populations, result.populations[::-1], atol=1e-12)
    assert result.stderr is None
    # full transfer on resonance
    assert result.populations[60] == pytest.approx(1.0, abs=1e-6)
    assert result.populations.argmax() == 60


def test_noise_free_model_ignores_method():
    config = rydberg.default_config(NoiseModel.NONE, detunings=[0.0, 1.0])
    result = rydberg.sweep(config, SweepMethod.DHEOM)
    assert result.depths == [None, None]
    assert_allclose(result.populations, rydberg.rabi_population(result.deltas, config.J0, config.T), atol=1e-12)


def test_sweep_rows_sorted_by_detuning():
    config = rydberg.default_config(NoiseModel.NONE, detunings=[1.0, -1.0, 0.0])
    result = rydberg.sweep(config, SweepMethod.COHERENT)
    assert_allclose(result.deltas, [-1.0, 0.0, 1.0])
    assert [row[0] for row in result.rows()] == [-1.0, 0.0, 1.0]


def test_vanishing_noise_dheom_matches_rabi():
    config = rydberg.default_config(NoiseModel.OU, detunings=[-2.0, 0.0, 1.5],
                                    process=ProcessSpec.ou(mu=1.0, gamma=1.5, sigma2=1e-10))
    result = rydberg.sweep(config, SweepMethod.DHEOM)
    assert_allclose(result.populations, rydberg.rabi_population(result.deltas, config.J0, config.T), atol=1e-4)
    assert all(depth is not None for depth in result.depths)


def test_monte_carlo_sweep_reports_standard_errors():
    config = rydberg.default_config(NoiseModel.OU, detunings=[0.0], trajectories=64, dt_sde=1e-3)
    result = rydberg.sweep(config, SweepMethod.MONTE_CARLO)
    assert result.stderr is not None and result.stderr[0] > 0
    assert len(result.rows()[0]) == 3


@pytest.mark.slow
def test_noise_signatures():
    workers = resolve_workers()
    coherent = rydberg.sweep(rydberg.default_config(NoiseModel.NONE), SweepMethod.COHERENT)
    jacobi = rydberg.sweep(rydberg.default_config(NoiseModel.JACOBI), SweepMethod.DHEOM, workers)
    right = np.linspace(0.0, 3.0, 61)
    ou = rydberg.sweep(rydberg.default_config(NoiseModel.OU, detunings=right), SweepMethod.DHEOM, workers)
    jacobi_right = jacobi.populations[jacobi.deltas >= 0]

    assert jacobi.populations.max() < coherent.populations.max()
    resonance = np.abs(jacobi.deltas).argmin()
    assert jacobi.populations[resonance] < coherent.populations[resonance] - 0.05
    assert rydberg.total_variation(jacobi_right) < rydberg.total_variation(ou.populations)


@pytest.mark.slow
@pytest.mark.parametrize("noise", [NoiseModel.OU, NoiseModel.SQUARE_ROOT, NoiseModel.JACOBI])
def test_dheom_agrees_with_monte_carlo_sweep(noise):
    detunings = [-3.0, -1.0, 0.0, 1.5, 3.0]
    config = rydberg.default_config(noise, detunings=detunings, trajectories=1000, seed=3)
    workers = resolve_workers()
    dheom = rydberg.sweep(config, SweepMethod.DHEOM, workers)
    mc = rydberg.sweep(config, SweepMethod.MONTE_CARLO, workers)
    allowance = np.maximum(3 * mc.stderr, 1e-2)
    assert np.all(np.abs(dheom.populations - mc.populations) <= allowance)

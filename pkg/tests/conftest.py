import numpy as np
import pytest

from models.configs import SolverConfig, TruncationPolicy
from models.process_spec import ProcessSpec
from pyFunctions.quantum_core import pauli


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def sx():
    return pauli("x")


@pytest.fixture
def sz():
    return pauli("z")


@pytest.fixture
def plus_state():
    return np.full((2, 2), 0.5, dtype=np.complex128)


@pytest.fixture
def ou_spec():
    return ProcessSpec.ou(mu=1.0, gamma=1.5, sigma2=0.3)


@pytest.fixture
def sr_spec():
    return ProcessSpec.square_root(mu=1.0, gamma=1.5, c0=0.0, c1=1.0)


@pytest.fixture
def jacobi_spec():
    return ProcessSpec.jacobi(mu=1.0, gamma=1.5, omega1=0.125, omega2=8.0, c=1.0)


@pytest.fixture(params=["ou", "sr", "jacobi"])
def any_spec(request, ou_spec, sr_spec, jacobi_spec):
    return {"ou": ou_spec, "sr": sr_spec, "jacobi": jacobi_spec}[request.param]


@pytest.fixture
def dephasing_config(ou_spec, sz, plus_state):
    """H0 = 0, V = sigma_z, rho0 = |+><+| under the reference OU process"""
    return SolverConfig(H0=np.zeros((2, 2)), V=sz, process=ou_spec, rho0=plus_state,
                        t_grid=np.array([0.0, 0.5, 1.0, 2.0]), truncation=TruncationPolicy.auto())

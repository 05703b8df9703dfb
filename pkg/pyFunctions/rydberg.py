"""
Stark-tuned Foerster transfer between two Rydberg atoms

Works in the single-excitation subspace {|1> = |r+ r->, |2> = |r- r+>} with
H0 = Delta diag(1, -1) and V = J0 sigma_x, so the driven Hamiltonian is
H0 + Omega(t) V. Energies in rad/us, times in us.
"""
import os
import json
import time
import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from models.configs import McConfig, NoiseModel, RydbergConfig, SolverConfig
from models.process_spec import ProcessKind, ProcessSpec
from pyFunctions import dheom_solver, mc_oracle
from pyFunctions.errors import InvalidParameter, PopulationOutOfRange
from pyFunctions.parallel import parallel_map
from pyFunctions.quantum_core import evolve_exact, pauli, projector

logger = logging.getLogger('rydberg')

CLIP_TOL = 1e-8

DEFAULTS_PATH = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                             "config", "rydberg_defaults.json")


class SweepMethod(str, Enum):
    DHEOM = "dheom"
    MONTE_CARLO = "mc"
    COHERENT = "coherent"

    @classmethod
    def parse(cls, value: str) -> "SweepMethod":
        aliases = {"dheom": cls.DHEOM, "mc": cls.MONTE_CARLO, "montecarlo": cls.MONTE_CARLO,
                   "coherent": cls.COHERENT}
        key = str(value).strip().lower()
        if key not in aliases:
            raise InvalidParameter(f"unknown sweep method '{value}' (expected dheom, mc or coherent)",
                                   field="method")
        return aliases[key]


@dataclass
class SweepResult:
    method: SweepMethod
    noise: NoiseModel
    deltas: np.ndarray
    populations: np.ndarray
    stderr: Optional[np.ndarray] = None
    depths: List[Optional[int]] = field(default_factory=list)
    wall_times: List[float] = field(default_factory=list)

    def rows(self) -> List[Tuple[float, ...]]:
        if self.stderr is None:
            return [(float(d), float(p)) for d, p in zip(self.deltas, self.populations)]
        return [(float(d), float(p), float(s)) for d, p, s in zip(self.deltas, self.populations, self.stderr)]


# =============================================================================
# REFERENCE SWEEP DEFAULTS
# =============================================================================

@lru_cache(maxsize=1)
def load_sweep_defaults() -> Dict[str, Any]:
    with open(DEFAULTS_PATH, "r", encoding="utf-8") as f:
        return json.load(f)


def reference_process(noise: NoiseModel) -> Optional[ProcessSpec]:
    """Noise process with the reference parameters; None for the coherent case"""
    params = dict(load_sweep_defaults()["processes"][NoiseModel(noise).value])
    kind = params.pop("kind")
    if kind is None:
        return None
    return ProcessSpec(kind=ProcessKind.parse(kind), **params)


def default_dt(noise: NoiseModel) -> float:
    return float(load_sweep_defaults()["dt"][NoiseModel(noise).value])


def default_config(noise: NoiseModel = NoiseModel.OU, **overrides) -> RydbergConfig:
    data = load_sweep_defaults()
    grid = data["detunings"]
    values = {
        "J0": data["coupling"]["J0"],
        "T": data["coupling"]["T"],
        "detunings": np.linspace(grid["min"], grid["max"], grid["points"]),
        "noise": NoiseModel(noise),
    }
    values.update(overrides)
    return RydbergConfig(**values)


def _mean_value(config: RydbergConfig) -> float:
    spec = config.process or reference_process(config.noise)
    if spec is None:
        return float(load_sweep_defaults()["processes"]["none"]["mu"])
    return spec.mu


# =============================================================================
# MODEL
# =============================================================================

def build_hamiltonians(delta: float, J0: float) -> Tuple[np.ndarray, np.ndarray]:
    H0 = float(delta) * pauli("z")
    V = float(J0) * pauli("x")
    return H0, V


def initial_state() -> np.ndarray:
    return projector(0, 2)


def transfer_population(rho) -> float:
    """<2|rho|2>, clipped to [0, 1]"""
    value = float(np.real(np.asarray(rho)[1, 1]))
    if value < -CLIP_TOL or value > 1 + CLIP_TOL:
        raise PopulationOutOfRange(f"transfer population {value:.12g} outside [0, 1] beyond {CLIP_TOL:g}")
    return min(max(value, 0.0), 1.0)


def rabi_population(delta, J: float, T: float):
    """J^2 / (J^2 + Delta^2) sin^2(sqrt(J^2 + Delta^2) T)"""
    delta = np.asarray(delta, dtype=float)
    rate2 = J ** 2 + delta ** 2
    value = J ** 2 / rate2 * np.sin(np.sqrt(rate2) * T) ** 2
    return float(value) if value.ndim == 0 else value


def total_variation(values) -> float:
    return float(np.sum(np.abs(np.diff(np.asarray(values, dtype=float)))))


# =============================================================================
# SWEEP
# =============================================================================

def solver_config(config: RydbergConfig, delta: float) -> SolverConfig:
    spec = config.process or reference_process(config.noise)
    if spec is None:
        raise InvalidParameter("noise 'none' has no stochastic process to solve", field="noise")
    H0, V = build_hamiltonians(delta, config.J0)
    return SolverConfig(H0=H0, V=V, process=spec, rho0=initial_state(), t_grid=np.array([0.0, config.T]),
                        dt=config.dt or default_dt(config.noise), truncation=config.truncation)


def _sweep_row(task) -> Tuple[float, Optional[float], Optional[int], float]:
    config, method, delta = task
    started = time.perf_counter()
    noiseless = config.process is None and NoiseModel(config.noise) is NoiseModel.NONE

    if method is SweepMethod.COHERENT or noiseless:
        H0, V = build_hamiltonians(delta, config.J0)
        rho = evolve_exact(H0 + _mean_value(config) * V, initial_state(), config.T)
        return transfer_population(rho), None, None, time.perf_counter() - started

    solver = solver_config(config, delta)
    if method is SweepMethod.DHEOM:
        result = dheom_solver.integrate(solver)
        return transfer_population(result.states[-1]), None, result.depth, time.perf_counter() - started

    mc = McConfig(solver=solver, trajectories=config.trajectories, dt_sde=config.dt_sde, seed=config.seed,
                  boundary_mode=config.boundary_mode)
    result = mc_oracle.average(mc)
    se = float(np.real(result.stderr[-1][1, 1]))
    return transfer_population(result.mean[-1]), se, None, time.perf_counter() - started


def sweep(config: RydbergConfig, method: SweepMethod = SweepMethod.DHEOM, workers: int = 1) -> SweepResult:
    """
    Transfer population at time T for every detuning, rows ordered by Delta

    Args:
        config: Sweep configuration
        method: DHEOM, Monte Carlo or the coherent (Omega = mu) baseline
        workers: Rows evaluated concurrently

    Returns:
        SweepResult: populations, Monte Carlo standard errors (mc only), depth and wall time per row
    """
    method = SweepMethod(method)
    deltas = np.sort(config.detunings)
    tasks = [(config, method, float(delta)) for delta in deltas]
    logger.info(f"sweeping {len(tasks)} detunings: method={method.value}, noise={NoiseModel(config.noise).value}, "
                f"workers={workers}")
    rows = parallel_map(_sweep_row, tasks, workers)

    with_se = method is SweepMethod.MONTE_CARLO and rows[0][1] is not None
    return SweepResult(
        method=method,
        noise=NoiseModel(config.noise),
        deltas=deltas,
        populations=np.array([row[0] for row in rows]),
        stderr=np.array([row[1] for row in rows]) if with_se else None,
        depths=[row[2] for row in rows],
        wall_times=[row[3] for row in rows],
    )

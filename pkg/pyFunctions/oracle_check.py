"""
Hierarchy vs Monte Carlo cross-check on seeded random two-level problems
"""
import time
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np

from models.configs import McConfig, NoiseModel, SolverConfig
from pyFunctions import dheom_solver, mc_oracle
from pyFunctions.quantum_core import max_abs, random_density_matrix, random_hermitian
from pyFunctions.rydberg import default_dt, reference_process

logger = logging.getLogger('oracle_check')

ABSOLUTE_ALLOWANCE = 1e-2
SE_FACTOR = 3.0
PROBLEM_SCALE = 0.5


@dataclass
class ProblemReport:
    index: int
    process: str
    depth: int
    max_deviation: float
    allowance: float    # allowance at the element with the largest deviation / allowance ratio
    worst_ratio: float
    propagator_deviation: float
    dheom_seconds: float
    mc_seconds: float
    conservation: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.worst_ratio <= 1.0


def random_problem(kind: NoiseModel, seed: int, index: int) -> SolverConfig:
    """Problem `index` of the seeded set: random H0, V, rho0 with the reference process of this kind, T = 2/gamma"""
    rng = np.random.default_rng([int(seed), int(index)])
    spec = reference_process(kind)
    return SolverConfig(
        H0=random_hermitian(2, rng, PROBLEM_SCALE),
        V=random_hermitian(2, rng, PROBLEM_SCALE),
        process=spec,
        rho0=random_density_matrix(2, rng),
        t_grid=np.array([0.0, 2.0 / spec.gamma]),
        dt=default_dt(kind),
    )


def compare(dheom_state: np.ndarray, mc_mean: np.ndarray, mc_stderr: np.ndarray):
    """Elementwise |difference| against max(3 SE, 1e-2), real and imaginary parts separately"""
    diff = dheom_state - mc_mean
    deviations = np.concatenate([np.abs(diff.real).ravel(), np.abs(diff.imag).ravel()])
    allowances = np.maximum(SE_FACTOR * np.concatenate([mc_stderr.real.ravel(), mc_stderr.imag.ravel()]),
                            ABSOLUTE_ALLOWANCE)
    ratios = deviations / allowances
    worst = int(np.argmax(ratios))
    return float(np.max(deviations)), float(allowances[worst]), float(ratios[worst])


def check_problem(kind: NoiseModel, seed: int, index: int, trajectories: int, workers: int = 1) -> ProblemReport:
    config = random_problem(kind, seed, index)

    started = time.perf_counter()
    density = dheom_solver.integrate(config)
    dheom_seconds = time.perf_counter() - started

    propagator = dheom_solver.integrate_propagator(config, depth=density.depth)
    mapped = dheom_solver.apply_map(propagator.maps[-1], config.rho0)

    started = time.perf_counter()
    mc = mc_oracle.average(McConfig(solver=config, trajectories=trajectories, seed=seed), workers=workers)
    mc_seconds = time.perf_counter() - started

    max_dev, allowance, ratio = compare(density.states[-1], mc.mean[-1], mc.stderr[-1])
    report = ProblemReport(
        index=index,
        process=NoiseModel(kind).value,
        depth=density.depth,
        max_deviation=max_dev,
        allowance=allowance,
        worst_ratio=ratio,
        propagator_deviation=max_abs(mapped - density.states[-1]),
        dheom_seconds=dheom_seconds,
        mc_seconds=mc_seconds,
        conservation={key: density.diagnostics[key]
                      for key in ("trace_drift", "max_aux_trace", "hermiticity_drift")},
    )
    logger.info(f"{report.process} problem {index}: depth={report.depth}, max deviation {max_dev:.3e} "
                f"(allowance {allowance:.3e}), propagator deviation {report.propagator_deviation:.2e}")
    return report


def cross_check(kinds: List[NoiseModel], seed: int, n_problems: int = 5, trajectories: int = 2000,
                workers: int = 1) -> Dict[str, Any]:
    """
    Run the cross-check for every kind and problem index

    Returns:
        dict: reports, overall pass flag, total DHEOM and MC wall time and their ratio
    """
    reports = [check_problem(kind, seed, index, trajectories, workers)
               for kind in kinds for index in range(n_problems)]
    dheom_total = sum(r.dheom_seconds for r in reports)
    mc_total = sum(r.mc_seconds for r in reports)
    return {
        "reports": reports,
        "passed": all(r.passed for r in reports),
        "max_deviation": max(r.max_deviation for r in reports),
        "worst_ratio": max(r.worst_ratio for r in reports),
        "max_propagator_deviation": max(r.propagator_deviation for r in reports),
        "dheom_seconds": dheom_total,
        "mc_seconds": mc_total,
        "speedup": mc_total / dheom_total if dheom_total > 0 else float("inf"),
    }

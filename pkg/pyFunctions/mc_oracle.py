"""
Monte Carlo oracle - sample noise paths, evolve each trajectory under
H0 + Omega(t) V and average

Trajectory i always draws from its own stream (seed, spawn_key=(i,)): first the
initial value from the stationary law, then every Euler-Maruyama normal. The
work is cut into fixed chunks of CHUNK_SIZE trajectories and the per-trajectory
results are reduced in index order, so the output does not depend on the worker
count.
"""
import math
import time
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from models.configs import BoundaryMode, McConfig
from models.process_spec import ProcessSpec
from pyFunctions import processes
from pyFunctions.parallel import parallel_map
from pyFunctions.quantum_core import hermiticity_drift, unitary_propagators
from pyFunctions.solver_logging import stage_timer

logger = logging.getLogger('mc_oracle')

CHUNK_SIZE = 64
BOUNDARY_OFFSET = 1e-12


@dataclass
class McResult:
    times: np.ndarray
    mean: np.ndarray    # (len(times), d, d)
    stderr: np.ndarray  # real part: SE of Re, imaginary part: SE of Im
    trajectories: int
    diagnostics: Dict[str, Any] = field(default_factory=dict)


def trajectory_stream(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


# =============================================================================
# SDE
# =============================================================================

def apply_boundary(spec: ProcessSpec, omega: np.ndarray, mode: BoundaryMode = BoundaryMode.REFLECT) -> np.ndarray:
    lower, upper = processes.domain(spec)
    if math.isinf(lower) and math.isinf(upper):
        return omega
    omega = np.array(omega, dtype=float, copy=True)
    if mode is BoundaryMode.REFLECT:
        omega = np.where(omega < lower, 2 * lower - omega, omega)
        omega = np.where(omega > upper, 2 * upper - omega, omega)
    # clamp mode, or a reflection that overshot the opposite side
    omega = np.where(omega < lower, lower + BOUNDARY_OFFSET, omega)
    omega = np.where(omega > upper, upper - BOUNDARY_OFFSET, omega)
    return omega


def sde_step(spec: ProcessSpec, omega, dt: float, rng: Optional[np.random.Generator] = None,
             xi=None, boundary_mode: BoundaryMode = BoundaryMode.REFLECT):
    """
    One Euler-Maruyama step Omega + A dt + sqrt(B dt) xi, folded back into the domain

    Args:
        spec: Process parameters
        omega: Current value(s)
        dt: Step size
        rng: Source of xi when xi is not given
        xi: Standard normal increment(s)
        boundary_mode: REFLECT mirrors across the violated boundary, CLAMP sets it 1e-12 inside

    Returns:
        float or ndarray matching omega
    """
    values = np.asarray(omega, dtype=float)
    if xi is None:
        if rng is None:
            raise ValueError("sde_step needs either rng or xi")
        xi = rng.standard_normal(values.shape)
    drift, diffusion = processes.sde_coefficients(spec, values)
    stepped = values + drift * dt + np.sqrt(np.maximum(diffusion, 0.0) * dt) * np.asarray(xi, dtype=float)
    stepped = apply_boundary(spec, stepped, boundary_mode)
    if np.ndim(omega) == 0:
        return float(stepped)
    return stepped


def _substep_plan(t_grid: np.ndarray, dt: float, dt_sde: float) -> List[Tuple[int, float, int, float]]:
    """Per grid interval: quantum steps, quantum step size, SDE sub-steps per quantum step, sub-step size"""
    plan = []
    for delta in np.diff(t_grid):
        n_q = max(1, math.ceil(delta / dt - 1e-9))
        h = delta / n_q
        n_sub = max(1, int(round(h / dt_sde)))
        plan.append((n_q, h, n_sub, h / n_sub))
    return plan


def _initial_and_normals(spec: ProcessSpec, seed: int, indices: range, n_normals: int):
    omega = np.empty(len(indices))
    xi = np.empty((len(indices), n_normals))
    for row, index in enumerate(indices):
        rng = trajectory_stream(seed, index)
        omega[row] = processes.sample_stationary(spec, rng)
        xi[row] = rng.standard_normal(n_normals)
    return omega, xi


def simulate_noise_paths(spec: ProcessSpec, n_paths: int, t_end: float, dt: float, seed: int = 0,
                         boundary_mode: BoundaryMode = BoundaryMode.REFLECT,
                         omega0: Optional[float] = None, n_times: int = 101) -> Tuple[np.ndarray, np.ndarray]:
    """Noise-only ensemble sampled at n_times points on [0, t_end]; returns (times, paths)"""
    processes.validate(spec)
    times = np.linspace(0.0, t_end, n_times)
    plan = _substep_plan(times, dt, dt)
    total = sum(n_q * n_sub for n_q, _, n_sub, _ in plan)
    paths = np.empty((n_paths, n_times))
    for start in range(0, n_paths, CHUNK_SIZE):
        indices = range(start, min(start + CHUNK_SIZE, n_paths))
        omega, xi = _initial_and_normals(spec, seed, indices, total)
        if omega0 is not None:
            omega[:] = omega0
        paths[indices.start:indices.stop, 0] = omega
        col = 0
        for k, (n_q, _, n_sub, step) in enumerate(plan, start=1):
            for _ in range(n_q * n_sub):
                omega = sde_step(spec, omega, step, xi=xi[:, col], boundary_mode=boundary_mode)
                col += 1
            paths[indices.start:indices.stop, k] = omega
    return times, paths


# =============================================================================
# TRAJECTORIES
# =============================================================================

def _run_chunk(task) -> np.ndarray:
    """(config, start, stop) -> states of trajectories start .. stop - 1, shape (m, K, d, d)"""
    config, start, stop = task
    solver = config.solver
    spec = solver.process
    indices = range(start, stop)
    plan = _substep_plan(solver.t_grid, solver.dt, config.dt_sde)
    total = sum(n_q * n_sub for n_q, _, n_sub, _ in plan)
    omega, xi = _initial_and_normals(spec, config.seed, indices, total)

    m, d = len(indices), solver.dim
    H0 = solver.H0[None]
    V = solver.V[None]
    rho = np.broadcast_to(solver.rho0, (m, d, d)).copy()
    out = np.empty((m, len(solver.t_grid), d, d), dtype=np.complex128)
    out[:, 0] = rho

    col = 0
    for k, (n_q, h, n_sub, step) in enumerate(plan, start=1):
        for _ in range(n_q):
            # trapezoidal average of the path over the quantum step
            acc = 0.5 * omega
            for _ in range(n_sub):
                omega = sde_step(spec, omega, step, xi=xi[:, col], boundary_mode=config.boundary_mode)
                acc = acc + omega
                col += 1
            omega_bar = (acc - 0.5 * omega) / n_sub
            U = unitary_propagators(H0 + omega_bar[:, None, None] * V, h)
            rho = U @ rho @ np.conj(np.swapaxes(U, -1, -2))
        out[:, k] = rho
    return out


def run_trajectory(config: McConfig, index: int) -> np.ndarray:
    """States of trajectory `index` at every grid time, shape (K, d, d)"""
    processes.validate(config.solver.process)
    return _run_chunk((config, index, index + 1))[0]


def _pairwise_sum(values: np.ndarray) -> np.ndarray:
    n = values.shape[0]
    if n == 1:
        return values[0]
    mid = n // 2
    return _pairwise_sum(values[:mid]) + _pairwise_sum(values[mid:])


def sample_moments(samples: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Mean and elementwise standard error over axis 0 (shifted by the first sample)

    Identical samples give SE = 0 exactly.
    """
    M = samples.shape[0]
    shift = samples[0]
    dev = samples - shift
    s1 = _pairwise_sum(dev)
    s2_re = _pairwise_sum(dev.real ** 2)
    s2_im = _pairwise_sum(dev.imag ** 2)
    mean = shift + s1 / M
    var_re = np.maximum(s2_re - s1.real ** 2 / M, 0.0) / (M - 1)
    var_im = np.maximum(s2_im - s1.imag ** 2 / M, 0.0) / (M - 1)
    return mean, np.sqrt(var_re / M) + 1j * np.sqrt(var_im / M)


def average(config: McConfig, workers: int = 1) -> McResult:
    """
    Ensemble mean and standard error at every grid time

    Args:
        config: Monte Carlo configuration
        workers: Process count for the chunk map

    Returns:
        McResult: mean, stderr and diagnostics (per-trajectory trace and Hermiticity drift, wall time)
    """
    processes.validate(config.solver.process)
    started = time.perf_counter()
    M = config.trajectories
    tasks = [(config, start, min(start + CHUNK_SIZE, M)) for start in range(0, M, CHUNK_SIZE)]

    with stage_timer("mc.average", trajectories=M, process=config.solver.process.kind.value) as extra:
        parts = parallel_map(_run_chunk, tasks, workers)
        samples = np.concatenate(parts, axis=0)
        mean, stderr = sample_moments(samples)
        extra["chunks"] = len(tasks)

    trace0 = np.trace(config.solver.rho0)
    diagnostics = {
        "trajectories": M,
        "chunks": len(tasks),
        "workers": workers,
        "trace_drift": float(np.max(np.abs(np.trace(samples, axis1=-2, axis2=-1) - trace0))),
        "hermiticity_drift": hermiticity_drift(samples),
        "wall_time": time.perf_counter() - started,
    }
    logger.info(f"averaged {M} {config.solver.process.kind.value} trajectories in "
                f"{diagnostics['wall_time']:.2f}s ({len(tasks)} chunks, {workers} workers)")
    return McResult(times=config.solver.t_grid.copy(), mean=mean, stderr=stderr, trajectories=M,
                    diagnostics=diagnostics)

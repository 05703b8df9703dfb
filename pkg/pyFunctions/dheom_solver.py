"""
Diffusive hierarchical equations of motion

The noise-averaged state rho_0 and the auxiliary matrices rho_1 .. rho_N obey

    d rho_n/dt = -(i[H0, .] + i b_n [V, .] + lambda_n) rho_n
                 - i a_{n+1} [V, rho_{n+1}] - i c_{n-1} [V, rho_{n-1}]

with the up-coupling at level N replaced by the terminator
-(a_{N+1} c_N / lambda_{N+1}) [V, [V, rho_N]]. The same ladder evolves the
vectorized dynamical map when [H, .] is read as left-multiplication by the
Liouvillian 1 (x) H - H^T (x) 1.

Two fixed-step RK4 steppers are provided. "direct" evaluates the ladder on the
stacked (N+1, d, d) array; "compiled" assembles the sparse block-tridiagonal
generator G once and applies the RK4 step polynomial of G as a single sparse
matrix per step size.
"""
import math
import time
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import sparse

from models.configs import SolverConfig, Stepper, TruncationMode
from pyFunctions import processes
from pyFunctions.errors import DepthCapExceeded, DimensionMismatch, StabilityGuard
from pyFunctions.quantum_core import (
    as_matrix,
    commutator_action,
    devectorize,
    hermiticity_drift,
    liouvillian_matrix,
    max_abs,
    resymmetrize,
    spectral_norm,
    vectorize,
)
from pyFunctions.solver_logging import stage_timer

logger = logging.getLogger('dheom_solver')

STABILITY_LIMIT = 0.1  # dt * lambda_N
DIVERGENCE_LIMIT = 1e6
DEPTH_STEP = 4


# =============================================================================
# DATA TYPES
# =============================================================================

@dataclass(frozen=True)
class HierarchyCoefficients:
    """Recurrence triples and decay rates for levels 0 .. depth + 1"""
    depth: int
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    lam: np.ndarray

    @property
    def terminator(self) -> float:
        N = self.depth
        assert self.lam[N + 1] > 0, "lambda_{N+1} must be positive"
        return float(self.a[N + 1] * self.c[N] / self.lam[N + 1])


@dataclass
class HierarchyState:
    depth: int
    aux: np.ndarray  # (depth + 1, d, d)
    t: float = 0.0

    @classmethod
    def initial(cls, rho0: np.ndarray, depth: int) -> "HierarchyState":
        d = rho0.shape[0]
        aux = np.zeros((depth + 1, d, d), dtype=np.complex128)
        aux[0] = rho0
        return cls(depth=depth, aux=aux, t=0.0)


@dataclass
class PropagatorHierarchy:
    depth: int
    aux: np.ndarray  # (depth + 1, d^2, d^2)
    t: float = 0.0

    @classmethod
    def initial(cls, dim: int, depth: int) -> "PropagatorHierarchy":
        aux = np.zeros((depth + 1, dim * dim, dim * dim), dtype=np.complex128)
        aux[0] = np.eye(dim * dim, dtype=np.complex128)
        return cls(depth=depth, aux=aux, t=0.0)


@dataclass
class IntegrationResult:
    times: np.ndarray
    states: np.ndarray  # (len(times), d, d), re-symmetrized
    depth: int
    diagnostics: Dict[str, Any] = field(default_factory=dict)


@dataclass
class PropagatorResult:
    times: np.ndarray
    maps: np.ndarray  # (len(times), d^2, d^2)
    depth: int
    diagnostics: Dict[str, Any] = field(default_factory=dict)


def hierarchy_coefficients(config_or_spec, depth: int) -> HierarchyCoefficients:
    spec = config_or_spec.process if isinstance(config_or_spec, SolverConfig) else config_or_spec
    a, b, c = processes.recurrence_arrays(spec, depth)
    lam = processes.eigenvalues(spec, depth + 1)
    return HierarchyCoefficients(depth=depth, a=a, b=b, c=c, lam=lam)


# =============================================================================
# RIGHT-HAND SIDE
# =============================================================================

def _ladder(aux: np.ndarray, h_action: Callable, v_action: Callable, co: HierarchyCoefficients) -> np.ndarray:
    """Derivative of every level; shared by the density and propagator ladders"""
    N = aux.shape[0] - 1
    vx = v_action(aux)
    out = -1j * h_action(aux) - 1j * co.b[:N + 1, None, None] * vx - co.lam[:N + 1, None, None] * aux
    out[:-1] -= 1j * co.a[1:N + 1, None, None] * vx[1:]
    out[1:] -= 1j * co.c[:N, None, None] * vx[:-1]
    out[N] -= co.terminator * v_action(vx[N])
    return out


def hierarchy_rhs(state: HierarchyState, config: SolverConfig,
                  coefficients: Optional[HierarchyCoefficients] = None) -> np.ndarray:
    """d(rho_0 .. rho_N)/dt, level N closed by terminator_rhs"""
    co = coefficients or hierarchy_coefficients(config, state.depth)
    if state.aux.shape[0] != co.depth + 1:
        raise DimensionMismatch(f"state has {state.aux.shape[0]} levels, expected {co.depth + 1}")
    N = co.depth
    rho = state.aux
    vx = commutator_action(config.V, rho)
    out = np.empty_like(rho)
    out[:N] = (-1j * commutator_action(config.H0, rho[:N])
               - 1j * co.b[:N, None, None] * vx[:N]
               - co.lam[:N, None, None] * rho[:N]
               - 1j * co.a[1:N + 1, None, None] * vx[1:N + 1])
    out[1:N] -= 1j * co.c[:N - 1, None, None] * vx[:N - 1]
    out[N] = terminator_rhs(state, config, co)
    return out


def terminator_rhs(state: HierarchyState, config: SolverConfig,
                   coefficients: Optional[HierarchyCoefficients] = None) -> np.ndarray:
    co = coefficients or hierarchy_coefficients(config, state.depth)
    N = co.depth
    rho_N = state.aux[N]
    v_rho = commutator_action(config.V, rho_N)
    result = (-1j * commutator_action(config.H0, rho_N) - 1j * co.b[N] * v_rho - co.lam[N] * rho_N
              - co.terminator * commutator_action(config.V, v_rho))
    if N >= 1:
        result = result - 1j * co.c[N - 1] * commutator_action(config.V, state.aux[N - 1])
    return result


def hierarchy_generator(config: SolverConfig, depth: int,
                        coefficients: Optional[HierarchyCoefficients] = None) -> sparse.csr_matrix:
    """
    Sparse generator of the whole ladder acting on the stacked column-vectorized levels
    [vec(rho_0); vec(rho_1); ...; vec(rho_N)]
    """
    co = coefficients or hierarchy_coefficients(config, depth)
    LH = liouvillian_matrix(config.H0)
    LV = liouvillian_matrix(config.V)
    d2 = LH.shape[0]
    levels = depth + 1

    ladder = (sparse.diags(-1j * co.b[:levels])
              + sparse.diags(-1j * co.a[1:levels], 1, shape=(levels, levels))
              + sparse.diags(-1j * co.c[:levels - 1], -1, shape=(levels, levels)))
    end = sparse.csr_matrix(([1.0], ([depth], [depth])), shape=(levels, levels))

    G = (sparse.kron(sparse.identity(levels), -1j * LH)
         + sparse.kron(ladder, LV)
         + sparse.kron(sparse.diags(-co.lam[:levels]), sparse.identity(d2))
         + sparse.kron(end, -co.terminator * (LV @ LV)))
    return G.tocsr().astype(np.complex128)


def stack_levels(aux: np.ndarray) -> np.ndarray:
    """(N+1, d, d) -> column-stacked vector of length (N+1) d^2"""
    return np.swapaxes(aux, -1, -2).reshape(-1)


def unstack_levels(v: np.ndarray, dim: int) -> np.ndarray:
    return np.swapaxes(v.reshape(-1, dim, dim), -1, -2)


# =============================================================================
# STEPPERS
# =============================================================================

def _step_key(h: float) -> float:
    # grid spacings from linspace differ in the last bits; share one step matrix
    return float(f"{h:.12g}")


def _grid_steps(t_grid: np.ndarray, dt: float) -> List[Tuple[int, float]]:
    steps = []
    for delta in np.diff(t_grid):
        n = max(1, math.ceil(delta / dt - 1e-9))
        steps.append((n, _step_key(delta / n)))
    return steps


class _CompiledStepper:
    """RK4 step polynomial of the sparse generator, one matrix per step size"""

    def __init__(self, generator: sparse.csr_matrix):
        self.generator = generator
        self._cache: Dict[float, sparse.csr_matrix] = {}

    def step_matrix(self, h: float) -> sparse.csr_matrix:
        if h not in self._cache:
            eye = sparse.identity(self.generator.shape[0], dtype=np.complex128, format='csr')
            hG = self.generator * h
            P = eye + hG @ (eye + (hG / 2) @ (eye + (hG / 3) @ (eye + hG / 4)))
            self._cache[h] = P.tocsr()
        return self._cache[h]

    def advance(self, x: np.ndarray, h: float, n_steps: int) -> np.ndarray:
        P = self.step_matrix(h)
        for _ in range(n_steps):
            x = P @ x
        return x


class _DirectStepper:
    """Classical RK4 on the stacked level array"""

    def __init__(self, rhs: Callable[[np.ndarray], np.ndarray]):
        self.rhs = rhs

    def advance(self, x: np.ndarray, h: float, n_steps: int) -> np.ndarray:
        f = self.rhs
        for _ in range(n_steps):
            k1 = f(x)
            k2 = f(x + 0.5 * h * k1)
            k3 = f(x + 0.5 * h * k2)
            k4 = f(x + h * k3)
            x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        return x


def _check_divergence(x: np.ndarray, t: float) -> None:
    size = max_abs(x)
    if not np.isfinite(size) or size > DIVERGENCE_LIMIT:
        raise StabilityGuard(f"hierarchy diverged at t={t:.6g} (max entry {size:.3e}); "
                             f"reduce dt or check the truncation depth")


# =============================================================================
# DEPTH SELECTION
# =============================================================================

def check_stability(config: SolverConfig, depth: int) -> None:
    lam = processes.eigenvalue(config.process, depth)
    if config.dt * lam > STABILITY_LIMIT:
        raise StabilityGuard(
            f"dt={config.dt:.3g} too large for depth {depth} (lambda_N={lam:.6g}, dt*lambda_N="
            f"{config.dt * lam:.3g} > {STABILITY_LIMIT}); largest admissible dt is {STABILITY_LIMIT / lam:.6g}")


def separation_depth(config: SolverConfig) -> Optional[int]:
    """Smallest N with lambda_N >= kappa (2 |H0|_2 + 2 |b_N| |V|_2), or None up to max_depth"""
    policy = config.truncation
    h_norm = spectral_norm(config.H0)
    v_norm = spectral_norm(config.V)
    _, b, _ = processes.recurrence_arrays(config.process, policy.max_depth)
    lam = processes.eigenvalues(config.process, policy.max_depth)
    for n in range(1, policy.max_depth + 1):
        if lam[n] >= policy.kappa * (2 * h_norm + 2 * abs(b[n]) * v_norm):
            return n
    return None


def _log_decay_ratio(config: SolverConfig, depth: int) -> None:
    ratios = [processes.coefficient_decay_ratio(config.process, n) for n in (depth, depth + 1)]
    logger.debug(f"coefficient decay ratio c_n/|a_n| at N={depth}: {ratios[0]:.4g}, N+1: {ratios[1]:.4g}")


def _start_depth(config: SolverConfig) -> int:
    start = separation_depth(config)
    if start is None:
        logger.warning(f"no depth <= {config.truncation.max_depth} satisfies the separation bound "
                       f"for the {config.process.kind.value} process; convergence scan starts at 1")
        return 1
    return start


def _scan(config: SolverConfig, run: Callable[[int], Tuple[Any, np.ndarray]]):
    """Raise depth in steps of 4 until level-0 output agrees with depth + 4"""
    policy = config.truncation
    depth = _start_depth(config)
    check_stability(config, depth)
    result, series = run(depth)
    history = []
    while True:
        deeper = depth + DEPTH_STEP
        if deeper > policy.max_depth:
            raise DepthCapExceeded(
                f"no depth <= {policy.max_depth} met convergence tolerance {policy.convergence_tol:g} "
                f"(last checked N={depth}, history {history})")
        check_stability(config, deeper)
        deeper_result, deeper_series = run(deeper)
        delta = max_abs(series - deeper_series)
        history.append((depth, delta))
        logger.debug(f"depth scan: N={depth} vs N={deeper}: max deviation {delta:.3e}")
        if delta <= policy.convergence_tol:
            logger.info(f"selected depth N={depth} (deviation {delta:.3e} vs N={deeper})")
            _log_decay_ratio(config, depth)
            return depth, result, history
        depth, result, series = deeper, deeper_result, deeper_series


def _decoupled(config: SolverConfig) -> bool:
    return max_abs(config.V) == 0.0


def select_depth(config: SolverConfig) -> int:
    """Truncation depth for this config: fixed, 1 when V = 0, else the convergence scan"""
    processes.validate(config.process)
    policy = config.truncation
    if policy.mode is TruncationMode.FIXED:
        return policy.depth
    if _decoupled(config):
        return 1
    depth, _, _ = _scan(config, lambda n: _density_run(config, n))
    return depth


# =============================================================================
# INTEGRATION
# =============================================================================

def _make_stepper(config: SolverConfig, depth: int, co: HierarchyCoefficients, propagator: bool):
    if config.stepper is Stepper.COMPILED:
        return _CompiledStepper(hierarchy_generator(config, depth, co))
    if propagator:
        LH = liouvillian_matrix(config.H0)
        LV = liouvillian_matrix(config.V)
        return _DirectStepper(lambda x: _ladder(x, lambda X: LH @ X, lambda X: LV @ X, co))
    H0, V = config.H0, config.V
    return _DirectStepper(lambda x: _ladder(x, lambda X: commutator_action(H0, X),
                                            lambda X: commutator_action(V, X), co))


def _density_run(config: SolverConfig, depth: int) -> Tuple[IntegrationResult, np.ndarray]:
    started = time.perf_counter()
    co = hierarchy_coefficients(config, depth)
    stepper = _make_stepper(config, depth, co, propagator=False)
    compiled = isinstance(stepper, _CompiledStepper)
    d = config.dim
    state = HierarchyState.initial(config.rho0, depth)
    x = stack_levels(state.aux) if compiled else state.aux

    def levels(x):
        return unstack_levels(x, d) if compiled else x

    trace0 = np.trace(config.rho0)
    raw = np.empty((len(config.t_grid), d, d), dtype=np.complex128)
    raw[0] = config.rho0
    trace_drift = 0.0
    aux_trace = 0.0
    herm_drift = hermiticity_drift(config.rho0)
    total_steps = 0

    for k, (n_steps, h) in enumerate(_grid_steps(config.t_grid, config.dt), start=1):
        x = stepper.advance(x, h, n_steps)
        total_steps += n_steps
        _check_divergence(x, config.t_grid[k])
        aux = levels(x)
        raw[k] = aux[0]
        trace_drift = max(trace_drift, abs(np.trace(aux[0]) - trace0))
        if depth >= 1:
            aux_trace = max(aux_trace, float(np.max(np.abs(np.trace(aux[1:], axis1=1, axis2=2)))))
        herm_drift = max(herm_drift, hermiticity_drift(aux))

    diagnostics = {
        "depth": depth,
        "stepper": config.stepper.value,
        "steps": total_steps,
        "trace_drift": float(trace_drift),
        "max_aux_trace": float(aux_trace),
        "hermiticity_drift": float(herm_drift),
        "wall_time": time.perf_counter() - started,
    }
    result = IntegrationResult(times=config.t_grid.copy(), states=resymmetrize(raw), depth=depth,
                               diagnostics=diagnostics)
    return result, raw


def integrate(config: SolverConfig, depth: Optional[int] = None) -> IntegrationResult:
    """
    Noise-averaged state rho_0(t) on config.t_grid

    Args:
        config: Validated solver configuration
        depth: Explicit truncation depth; None follows config.truncation

    Returns:
        IntegrationResult: re-symmetrized states plus diagnostics (trace drift,
        auxiliary trace, Hermiticity drift before re-symmetrization, wall time)
    """
    processes.validate(config.process)
    with stage_timer("dheom.integrate", process=config.process.kind.value) as extra:
        if depth is None and config.truncation.mode is TruncationMode.AUTO and not _decoupled(config):
            depth, result, history = _scan(config, lambda n: _density_run(config, n))
            result.diagnostics["depth_scan"] = history
        else:
            if depth is None:
                depth = config.truncation.depth if config.truncation.mode is TruncationMode.FIXED else 1
            check_stability(config, depth)
            result, _ = _density_run(config, depth)
        extra["depth"] = depth
        extra["steps"] = result.diagnostics["steps"]
    logger.info(f"integrated {config.process.kind.value} hierarchy: depth={depth}, "
                f"steps={result.diagnostics['steps']}, trace drift={result.diagnostics['trace_drift']:.2e}")
    return result


def _propagator_run(config: SolverConfig, depth: int) -> Tuple[PropagatorResult, np.ndarray]:
    started = time.perf_counter()
    co = hierarchy_coefficients(config, depth)
    stepper = _make_stepper(config, depth, co, propagator=True)
    compiled = isinstance(stepper, _CompiledStepper)
    d = config.dim
    d2 = d * d
    state = PropagatorHierarchy.initial(d, depth)
    x = state.aux.reshape(-1, d2) if compiled else state.aux

    # tr(E(X)) = tr(X) for all X  <=>  vec(1)^T E = vec(1)^T
    trace_row = vectorize(np.eye(d))
    maps = np.empty((len(config.t_grid), d2, d2), dtype=np.complex128)
    maps[0] = state.aux[0]
    trace_drift = 0.0
    aux_trace = 0.0
    total_steps = 0

    for k, (n_steps, h) in enumerate(_grid_steps(config.t_grid, config.dt), start=1):
        x = stepper.advance(x, h, n_steps)
        total_steps += n_steps
        _check_divergence(x, config.t_grid[k])
        aux = x.reshape(depth + 1, d2, d2) if compiled else x
        maps[k] = aux[0]
        trace_drift = max(trace_drift, max_abs(trace_row @ aux[0] - trace_row))
        if depth >= 1:
            aux_trace = max(aux_trace, max_abs(trace_row @ aux[1:]))

    diagnostics = {
        "depth": depth,
        "stepper": config.stepper.value,
        "steps": total_steps,
        "trace_drift": float(trace_drift),
        "max_aux_trace": float(aux_trace),
        "wall_time": time.perf_counter() - started,
    }
    return PropagatorResult(times=config.t_grid.copy(), maps=maps, depth=depth, diagnostics=diagnostics), maps


def integrate_propagator(config: SolverConfig, depth: Optional[int] = None) -> PropagatorResult:
    """Dynamical map E(t) = E_0(t) on config.t_grid; config.rho0 is not used"""
    processes.validate(config.process)
    with stage_timer("dheom.propagator", process=config.process.kind.value) as extra:
        if depth is None and config.truncation.mode is TruncationMode.AUTO and not _decoupled(config):
            depth, result, history = _scan(config, lambda n: _propagator_run(config, n))
            result.diagnostics["depth_scan"] = history
        else:
            if depth is None:
                depth = config.truncation.depth if config.truncation.mode is TruncationMode.FIXED else 1
            check_stability(config, depth)
            result, _ = _propagator_run(config, depth)
        extra["depth"] = depth
    return result


def apply_map(E, rho) -> np.ndarray:
    """devectorize(E vec(rho)), re-symmetrized"""
    E = np.asarray(E, dtype=np.complex128)
    rho = as_matrix(rho, "rho")
    d2 = rho.shape[0] ** 2
    if E.shape != (d2, d2):
        raise DimensionMismatch(f"map of shape {E.shape} cannot act on a {rho.shape[0]}-level state")
    return resymmetrize(devectorize(E @ vectorize(rho), rho.shape[0]))


# =============================================================================
# ANALYTIC REFERENCE
# =============================================================================

def kubo_dephasing_coherence(mu: float, gamma: float, sigma2: float, t):
    """rho_01(t) for H = Omega(t) sigma_z, OU noise, rho(0) = |+><+|"""
    t = np.asarray(t, dtype=float)
    s2 = sigma2 / (2 * gamma)
    value = 0.5 * np.exp(-2j * mu * t - 4 * s2 * (gamma * t - 1 + np.exp(-gamma * t)) / gamma ** 2)
    if value.ndim == 0:
        return complex(value)
    return value

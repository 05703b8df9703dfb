"""
Diffusion process catalog

Parameter validation, generator eigenvalues, three-term recurrence triples,
backward eigenfunctions, stationary laws and SDE coefficients for the
Ornstein-Uhlenbeck, square-root and Jacobi processes.

Backward eigenfunctions use the n!-scaled normalization
    OU      f_n = He_n(sqrt(2 gamma / sigma2) (omega - mu)) / n!
    SR      f_n = L_n^(alpha)((2 gamma / c1)(omega + c0 / c1)) / n!
    Jacobi  f_n = P_n^(alpha, beta)(2 (omega - omega2) / (omega2 - omega1) + 1) / n!
and are evaluated by the recurrence itself so the solver coefficients and the
functions they describe share one source of truth.
"""
import logging
import math
from typing import List, Optional, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial
from scipy import special, stats

from models.process_spec import ProcessKind, ProcessSpec, RecurrenceTriple
from pyFunctions.errors import (
    DegenerateRecurrence,
    DomainError,
    InvalidParameter,
    MeanOutOfDomain,
    TruncationUnsound,
    ValidationError,
)

logger = logging.getLogger('processes')

ArrayLike = Union[float, np.ndarray]

_DEGENERATE_ETA = (0.0, -1.0, -2.0)
_ETA_TOL = 1e-12


# =============================================================================
# VALIDATION
# =============================================================================

def _required(spec: ProcessSpec, name: str) -> float:
    value = getattr(spec, name)
    if value is None:
        raise ValidationError(f"{spec.kind.value} process requires parameter '{name}'", field=name)
    if not math.isfinite(value):
        raise InvalidParameter(f"parameter '{name}' must be finite, got {value}", field=name)
    return float(value)


def _checks(spec: ProcessSpec) -> List[ValidationError]:
    """Every violated constraint, in the order they are reported"""
    problems: List[ValidationError] = []

    def attempt(check):
        try:
            check()
        except ValidationError as e:
            problems.append(e)

    def check_common():
        gamma = _required(spec, "gamma")
        _required(spec, "mu")
        if gamma <= 0:
            raise InvalidParameter(f"mean-reversion rate gamma must be positive, got {gamma}", field="gamma")

    attempt(check_common)

    if spec.kind is ProcessKind.OU:
        def check_sigma2():
            if _required(spec, "sigma2") <= 0:
                raise InvalidParameter(f"sigma2 must be positive, got {spec.sigma2}", field="sigma2")
        attempt(check_sigma2)

    elif spec.kind is ProcessKind.SQUARE_ROOT:
        def check_sr():
            mu = _required(spec, "mu")
            c0 = _required(spec, "c0")
            c1 = _required(spec, "c1")
            if c1 <= 0:
                raise InvalidParameter(f"c1 must be positive, got {c1}", field="c1")
            if not mu > -c0 / c1:
                raise MeanOutOfDomain(f"mu={mu} must exceed -c0/c1={-c0 / c1}", field="mu")
            if (spec.gamma or 0) > 0:
                alpha, _ = alpha_beta(spec)
                if not alpha > -1:
                    raise InvalidParameter(f"derived alpha={alpha} must exceed -1", field="alpha")
        attempt(check_sr)

        def check_truncation():
            if spec.gamma is not None and 0 < spec.gamma <= 1:
                message = (f"square-root process with gamma={spec.gamma} <= 1: hierarchy truncation "
                           f"is only guaranteed for gamma > 1")
                if spec.allow_unsound_truncation:
                    logger.warning(f"{message} (override active, continuing)")
                else:
                    raise TruncationUnsound(message, field="gamma")
        attempt(check_truncation)

    else:
        def check_jacobi():
            mu = _required(spec, "mu")
            w1 = _required(spec, "omega1")
            w2 = _required(spec, "omega2")
            c = _required(spec, "c")
            if not w1 < w2:
                raise InvalidParameter(f"omega1={w1} must be below omega2={w2}", field="omega1")
            if c <= 0:
                raise InvalidParameter(f"c must be positive, got {c}", field="c")
            if not w1 < mu < w2:
                raise MeanOutOfDomain(f"mu={mu} must lie in ({w1}, {w2})", field="mu")
            if (spec.gamma or 0) > 0:
                alpha, beta = alpha_beta(spec)
                if not (alpha > -1 and beta > -1):
                    raise InvalidParameter(f"derived alpha={alpha}, beta={beta} must exceed -1", field="alpha")
                _jacobi_eta(alpha, beta, 0)
        attempt(check_jacobi)

    return problems


def validate_all(spec: ProcessSpec) -> List[ValidationError]:
    return _checks(spec)


def validate(spec: ProcessSpec) -> ProcessSpec:
    """Raise the first violated constraint; returns the spec when valid"""
    problems = _checks(spec)
    if problems:
        raise problems[0]
    return spec


# =============================================================================
# DERIVED QUANTITIES
# =============================================================================

def alpha_beta(spec: ProcessSpec) -> Tuple[Optional[float], Optional[float]]:
    if spec.kind is ProcessKind.SQUARE_ROOT:
        return (2 * spec.gamma / spec.c1) * (spec.mu + spec.c0 / spec.c1) - 1, None
    if spec.kind is ProcessKind.JACOBI:
        width = spec.omega2 - spec.omega1
        scale = 2 * spec.gamma / spec.c
        return scale * (spec.omega2 - spec.mu) / width - 1, scale * (spec.mu - spec.omega1) / width - 1
    return None, None


def domain(spec: ProcessSpec) -> Tuple[float, float]:
    if spec.kind is ProcessKind.SQUARE_ROOT:
        return -spec.c0 / spec.c1, math.inf
    if spec.kind is ProcessKind.JACOBI:
        return spec.omega1, spec.omega2
    return -math.inf, math.inf


def stationary_mean(spec: ProcessSpec) -> float:
    return spec.mu


def stationary_variance(spec: ProcessSpec) -> float:
    if spec.kind is ProcessKind.OU:
        return spec.sigma2 / (2 * spec.gamma)
    if spec.kind is ProcessKind.SQUARE_ROOT:
        return spec.c1 * (spec.mu + spec.c0 / spec.c1) / (2 * spec.gamma)
    return spec.c * (spec.mu - spec.omega1) * (spec.omega2 - spec.mu) / (2 * spec.gamma + spec.c)


def eigenvalue(spec: ProcessSpec, n: int) -> float:
    """lambda_n: n gamma (OU, SR), n gamma + c n (n - 1) / 2 (Jacobi)"""
    if n < 0:
        raise ValueError(f"level must be non-negative, got {n}")
    if spec.kind is ProcessKind.JACOBI:
        return n * spec.gamma + 0.5 * spec.c * n * (n - 1)
    return n * spec.gamma


def eigenvalues(spec: ProcessSpec, depth: int) -> np.ndarray:
    return np.array([eigenvalue(spec, n) for n in range(depth + 1)])


def _jacobi_eta(alpha: float, beta: float, n: int) -> float:
    eta = alpha + beta + 2 * n
    for bad in _DEGENERATE_ETA:
        if abs(eta - bad) < _ETA_TOL:
            raise DegenerateRecurrence(
                f"Jacobi recurrence degenerates at level {n} (eta_n = {eta:.3g}); "
                f"2 gamma / c = {alpha + beta + 2:.6g} is not supported",
                field="c",
            )
    return eta


def recurrence(spec: ProcessSpec, n: int) -> RecurrenceTriple:
    """(a_n, b_n, c_n) with omega f_n = a_n f_{n-1} + b_n f_n + c_n f_{n+1}"""
    if n < 0:
        raise ValueError(f"level must be non-negative, got {n}")

    if spec.kind is ProcessKind.OU:
        s = math.sqrt(spec.sigma2 / (2 * spec.gamma))
        return RecurrenceTriple(a=s if n > 0 else 0.0, b=spec.mu, c=(n + 1) * s)

    if spec.kind is ProcessKind.SQUARE_ROOT:
        alpha, _ = alpha_beta(spec)
        k = spec.c1 / (2 * spec.gamma)
        a = -k * (alpha + n) / n if n > 0 else 0.0
        b = k * (alpha + 2 * n + 1) - spec.c0 / spec.c1
        return RecurrenceTriple(a=a, b=b, c=-k * (n + 1) ** 2)

    # Jacobi: the Delta-omega (not Delta-omega / 2) factor on a_n and c_n is what the
    # n!-scaled Jacobi polynomials obey; it makes a_1 c_0 equal the Beta variance.
    alpha, beta = alpha_beta(spec)
    width = spec.omega2 - spec.omega1
    eta = _jacobi_eta(alpha, beta, n)
    a = width * (alpha + n) * (beta + n) / (n * eta * (eta + 1)) if n > 0 else 0.0
    b = spec.omega2 - 0.5 * width * ((alpha ** 2 - beta ** 2) / (eta * (eta + 2)) + 1)
    c = width * (n + 1) ** 2 * (eta - n + 1) / ((eta + 1) * (eta + 2))
    return RecurrenceTriple(a=a, b=b, c=c)


def recurrence_arrays(spec: ProcessSpec, depth: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """a, b, c for levels 0 .. depth + 1 (the terminator needs a_{N+1})"""
    triples = [recurrence(spec, n) for n in range(depth + 2)]
    return (np.array([t.a for t in triples]),
            np.array([t.b for t in triples]),
            np.array([t.c for t in triples]))


def coefficient_decay_ratio(spec: ProcessSpec, n: int) -> float:
    """c_n / |a_n|, which must grow with n for the terminator closure to hold"""
    triple = recurrence(spec, max(n, 1))
    return abs(triple.c) / abs(triple.a)


# =============================================================================
# EIGENFUNCTIONS
# =============================================================================

def _check_in_domain(spec: ProcessSpec, omega: np.ndarray) -> None:
    lower, upper = domain(spec)
    if np.any(omega < lower) or np.any(omega > upper) or not np.all(np.isfinite(omega)):
        raise DomainError(f"omega outside the {spec.kind.value} process domain [{lower}, {upper}]")


def eigenfunction_backward(spec: ProcessSpec, n: int, omega: ArrayLike) -> ArrayLike:
    """Backward eigenfunction f_n(omega) by upward recurrence from f_0 = 1"""
    values = np.asarray(omega, dtype=float)
    _check_in_domain(spec, values)
    previous = np.zeros_like(values)
    current = np.ones_like(values)
    for level in range(n):
        triple = recurrence(spec, level)
        previous, current = current, ((values - triple.b) * current - triple.a * previous) / triple.c
    if np.ndim(omega) == 0:
        return float(current)
    return current


def eigenfunction_polynomial(spec: ProcessSpec, n: int) -> Polynomial:
    """f_n as an explicit polynomial in omega, from the same recurrence"""
    x = Polynomial([0.0, 1.0])
    previous = Polynomial([0.0])
    current = Polynomial([1.0])
    for level in range(n):
        triple = recurrence(spec, level)
        previous, current = current, ((x - triple.b) * current - triple.a * previous) / triple.c
    return current


# =============================================================================
# STATIONARY LAW
# =============================================================================

def stationary_pdf(spec: ProcessSpec, omega: ArrayLike) -> ArrayLike:
    values = np.asarray(omega, dtype=float)
    if spec.kind is ProcessKind.OU:
        density = math.sqrt(spec.gamma / (math.pi * spec.sigma2)) * np.exp(
            -spec.gamma * (values - spec.mu) ** 2 / spec.sigma2)
    elif spec.kind is ProcessKind.SQUARE_ROOT:
        alpha, _ = alpha_beta(spec)
        density = stats.gamma.pdf(values + spec.c0 / spec.c1, a=alpha + 1, scale=spec.c1 / (2 * spec.gamma))
    else:
        alpha, beta = alpha_beta(spec)
        width = spec.omega2 - spec.omega1
        inside = (values > spec.omega1) & (values < spec.omega2)
        density = np.where(inside, stats.beta.pdf(values, beta + 1, alpha + 1, loc=spec.omega1, scale=width), 0.0)
    if np.ndim(omega) == 0:
        return float(density)
    return density


def sample_stationary(spec: ProcessSpec, rng: np.random.Generator, size=None) -> ArrayLike:
    if spec.kind is ProcessKind.OU:
        return rng.normal(spec.mu, math.sqrt(stationary_variance(spec)), size=size)
    if spec.kind is ProcessKind.SQUARE_ROOT:
        alpha, _ = alpha_beta(spec)
        return rng.gamma(alpha + 1, spec.c1 / (2 * spec.gamma), size=size) - spec.c0 / spec.c1
    alpha, beta = alpha_beta(spec)
    return spec.omega1 + (spec.omega2 - spec.omega1) * rng.beta(beta + 1, alpha + 1, size=size)


def quadrature_rule(spec: ProcessSpec, n_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss rule for the stationary measure; weights sum to 1"""
    if spec.kind is ProcessKind.OU:
        x, w = special.roots_hermitenorm(n_nodes)
        nodes = spec.mu + math.sqrt(stationary_variance(spec)) * x
    elif spec.kind is ProcessKind.SQUARE_ROOT:
        alpha, _ = alpha_beta(spec)
        y, w = special.roots_genlaguerre(n_nodes, alpha)
        nodes = y * spec.c1 / (2 * spec.gamma) - spec.c0 / spec.c1
    else:
        alpha, beta = alpha_beta(spec)
        x, w = special.roots_jacobi(n_nodes, alpha, beta)
        nodes = spec.omega2 + 0.5 * (spec.omega2 - spec.omega1) * (x - 1)
    return nodes, w / np.sum(w)


# =============================================================================
# SDE COEFFICIENTS
# =============================================================================

def sde_coefficients(spec: ProcessSpec, omega: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """Drift A(omega) and diffusion B(omega) of d omega = A dt + sqrt(B) dW"""
    values = np.asarray(omega, dtype=float)
    drift = -spec.gamma * (values - spec.mu)
    if spec.kind is ProcessKind.OU:
        diffusion = np.full_like(values, spec.sigma2)
    elif spec.kind is ProcessKind.SQUARE_ROOT:
        diffusion = spec.c1 * values + spec.c0
    else:
        diffusion = -spec.c * (values - spec.omega1) * (values - spec.omega2)
    if np.ndim(omega) == 0:
        return float(drift), float(diffusion)
    return drift, diffusion

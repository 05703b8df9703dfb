"""
Run configuration models for the hierarchy solver, the Monte Carlo oracle and
the Rydberg transfer application
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from models.process_spec import ProcessSpec
from pyFunctions.errors import DimensionMismatch, InvalidParameter, NotHermitian
from pyFunctions.quantum_core import as_matrix, hermiticity_drift, make_density_matrix

DEFAULT_DT = 1e-3
DEFAULT_KAPPA = 10.0
DEFAULT_CONVERGENCE_TOL = 1e-6
DEFAULT_MAX_DEPTH = 512
DEFAULT_TRAJECTORIES = 500
DEFAULT_DT_SDE = 1e-4


class TruncationMode(str, Enum):
    FIXED = "fixed"
    AUTO = "auto"


class Stepper(str, Enum):
    COMPILED = "compiled"
    DIRECT = "direct"


class BoundaryMode(str, Enum):
    REFLECT = "reflect"
    CLAMP = "clamp"


@dataclass(frozen=True)
class TruncationPolicy:
    mode: TruncationMode = TruncationMode.AUTO
    depth: Optional[int] = None
    kappa: float = DEFAULT_KAPPA
    convergence_tol: float = DEFAULT_CONVERGENCE_TOL
    max_depth: int = DEFAULT_MAX_DEPTH

    def __post_init__(self):
        if self.kappa <= 1:
            raise InvalidParameter(f"kappa must exceed 1, got {self.kappa}", field="kappa")
        if self.convergence_tol <= 0:
            raise InvalidParameter(f"convergence_tol must be positive, got {self.convergence_tol}",
                                   field="convergence_tol")
        if self.max_depth < 1:
            raise InvalidParameter(f"max_depth must be at least 1, got {self.max_depth}", field="max_depth")
        if self.mode is TruncationMode.FIXED:
            if self.depth is None or self.depth < 1:
                raise InvalidParameter("fixed truncation needs depth >= 1", field="depth")
            if self.depth > self.max_depth:
                raise InvalidParameter(f"depth {self.depth} exceeds max_depth {self.max_depth}", field="depth")

    @classmethod
    def fixed(cls, depth: int, **kwargs) -> "TruncationPolicy":
        return cls(mode=TruncationMode.FIXED, depth=int(depth), **kwargs)

    @classmethod
    def auto(cls, **kwargs) -> "TruncationPolicy":
        return cls(mode=TruncationMode.AUTO, **kwargs)


def _check_grid(t_grid: np.ndarray) -> None:
    if t_grid.ndim != 1 or t_grid.size < 1:
        raise InvalidParameter("t_grid must be a non-empty 1-d array", field="t_grid")
    if t_grid[0] != 0.0:
        raise InvalidParameter(f"t_grid must start at 0, got {t_grid[0]}", field="t_grid")
    if np.any(np.diff(t_grid) <= 0):
        raise InvalidParameter("t_grid must be strictly increasing", field="t_grid")


@dataclass(frozen=True, eq=False)
class SolverConfig:
    H0: np.ndarray
    V: np.ndarray
    process: ProcessSpec
    rho0: np.ndarray
    t_grid: np.ndarray
    dt: float = DEFAULT_DT
    truncation: TruncationPolicy = field(default_factory=TruncationPolicy)
    stepper: Stepper = Stepper.COMPILED

    def __post_init__(self):
        H0 = as_matrix(self.H0, "H0")
        V = as_matrix(self.V, "V")
        rho0 = make_density_matrix(self.rho0)
        if not (H0.shape == V.shape == rho0.shape):
            raise DimensionMismatch(f"H0 {H0.shape}, V {V.shape} and rho0 {rho0.shape} must share one dimension")
        for name, M in (("H0", H0), ("V", V)):
            if hermiticity_drift(M) > 1e-12:
                raise NotHermitian(f"{name} is not Hermitian (drift {hermiticity_drift(M):.3e})")
        t_grid = np.array(self.t_grid, dtype=float)
        _check_grid(t_grid)
        if not self.dt > 0:
            raise InvalidParameter(f"dt must be positive, got {self.dt}", field="dt")
        object.__setattr__(self, "H0", H0)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "rho0", rho0)
        object.__setattr__(self, "t_grid", t_grid)
        object.__setattr__(self, "dt", float(self.dt))

    @property
    def dim(self) -> int:
        return self.H0.shape[0]

    def replace(self, **changes) -> "SolverConfig":
        values = {name: getattr(self, name) for name in self.__dataclass_fields__}
        values.update(changes)
        return SolverConfig(**values)


@dataclass(frozen=True, eq=False)
class McConfig:
    solver: SolverConfig
    trajectories: int = DEFAULT_TRAJECTORIES
    dt_sde: float = DEFAULT_DT_SDE
    seed: int = 0
    boundary_mode: BoundaryMode = BoundaryMode.REFLECT

    def __post_init__(self):
        if self.trajectories < 2:
            raise InvalidParameter(f"need at least 2 trajectories, got {self.trajectories}", field="trajectories")
        if not self.dt_sde > 0:
            raise InvalidParameter(f"dt_sde must be positive, got {self.dt_sde}", field="dt_sde")
        if self.dt_sde > self.solver.dt:
            raise InvalidParameter(f"dt_sde {self.dt_sde} exceeds quantum step {self.solver.dt}", field="dt_sde")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise InvalidParameter(f"seed must be a 64-bit unsigned integer, got {self.seed}", field="seed")

    def replace(self, **changes) -> "McConfig":
        values = {name: getattr(self, name) for name in self.__dataclass_fields__}
        values.update(changes)
        return McConfig(**values)


class NoiseModel(str, Enum):
    NONE = "none"
    OU = "ou"
    SQUARE_ROOT = "sr"
    JACOBI = "jacobi"


@dataclass(frozen=True, eq=False)
class RydbergConfig:
    J0: float = math.pi / 2
    T: float = 1.0
    detunings: np.ndarray = field(default_factory=lambda: np.linspace(-3.0, 3.0, 121))
    noise: NoiseModel = NoiseModel.OU
    process: Optional[ProcessSpec] = None
    dt: Optional[float] = None  # None: per-noise default from config/rydberg_defaults.json
    truncation: TruncationPolicy = field(default_factory=TruncationPolicy)
    trajectories: int = DEFAULT_TRAJECTORIES
    dt_sde: float = DEFAULT_DT_SDE
    seed: int = 0
    boundary_mode: BoundaryMode = BoundaryMode.REFLECT

    def __post_init__(self):
        if not self.J0 > 0:
            raise InvalidParameter(f"J0 must be positive, got {self.J0}", field="J0")
        if not self.T > 0:
            raise InvalidParameter(f"T must be positive, got {self.T}", field="T")
        detunings = np.atleast_1d(np.array(self.detunings, dtype=float))
        if detunings.size == 0:
            raise InvalidParameter("detunings must not be empty", field="detunings")
        if self.dt is not None and not self.dt > 0:
            raise InvalidParameter(f"dt must be positive, got {self.dt}", field="dt")
        object.__setattr__(self, "detunings", detunings)

    def replace(self, **changes) -> "RydbergConfig":
        values = {name: getattr(self, name) for name in self.__dataclass_fields__}
        values.update(changes)
        return RydbergConfig(**values)

"""
Run configuration files (.cfg)

Flat `[section]` + `key = value` text, one key per line, `#` starts a comment.
Matrices are written row-major: rows separated by `;`, entries by `,`, each
entry a Python complex literal (`1`, `-0.5j`, `0.3+1e-2j`). The schema and all
defaults are documented in config/README.md.

A file with a [rydberg] section parses to RydbergConfig, one with a
[montecarlo] section (and no [rydberg]) to McConfig, anything else to
SolverConfig.
"""
import hashlib
import logging
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from models.configs import (
    DEFAULT_CONVERGENCE_TOL,
    DEFAULT_DT,
    DEFAULT_DT_SDE,
    DEFAULT_KAPPA,
    DEFAULT_MAX_DEPTH,
    DEFAULT_TRAJECTORIES,
    BoundaryMode,
    McConfig,
    NoiseModel,
    RydbergConfig,
    SolverConfig,
    Stepper,
    TruncationMode,
    TruncationPolicy,
)
from models.process_spec import ProcessKind, ProcessSpec
from pyFunctions import processes
from pyFunctions.errors import InvalidParameter, ParseError, ValidationError

logger = logging.getLogger('run_config')

ParsedConfig = Union[SolverConfig, McConfig, RydbergConfig]

SECTION_ORDER = ["system", "process", "solver", "montecarlo", "rydberg"]

# key -> value kind, per section
SCHEMA: Dict[str, Dict[str, str]] = {
    "system": {"H0": "matrix", "V": "matrix", "rho0": "matrix"},
    "process": {
        "kind": "str", "mu": "float", "gamma": "float", "sigma2": "float", "c0": "float", "c1": "float",
        "omega1": "float", "omega2": "float", "c": "float", "allow_unsound_truncation": "bool",
    },
    "solver": {
        "t_end": "float", "n_times": "int", "times": "list", "dt": "float", "truncation": "str",
        "depth": "int", "kappa": "float", "tol": "float", "max_depth": "int", "stepper": "str",
    },
    "montecarlo": {"trajectories": "int", "dt_sde": "float", "seed": "int", "boundary_mode": "str"},
    "rydberg": {
        "J0": "float", "T": "float", "delta_min": "float", "delta_max": "float", "n_detunings": "int",
        "detunings": "list", "noise": "str",
    },
}


# =============================================================================
# VALUE PARSING
# =============================================================================

def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected true/false, got '{text}'")


def _parse_matrix(text: str) -> np.ndarray:
    rows = [row for row in text.split(";") if row.strip()]
    values = [[complex(entry.replace(" ", "")) for entry in row.split(",")] for row in rows]
    widths = {len(row) for row in values}
    if len(widths) != 1:
        raise ValueError("matrix rows have different lengths")
    return np.array(values, dtype=np.complex128)


def _parse_list(text: str) -> List[float]:
    return [float(item) for item in text.split(",") if item.strip()]


_PARSERS: Dict[str, Callable[[str], object]] = {
    "float": float,
    "int": int,
    "bool": _parse_bool,
    "str": lambda text: text.strip().strip('"').strip("'"),
    "matrix": _parse_matrix,
    "list": _parse_list,
}


def _read_sections(text: str) -> Dict[str, Dict[str, Tuple[object, int]]]:
    """section -> key -> (value, line number)"""
    sections: Dict[str, Dict[str, Tuple[object, int]]] = {}
    current: Optional[str] = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            if current not in SCHEMA:
                raise ParseError(f"unknown section [{current}]", line=lineno)
            if current in sections:
                raise ParseError(f"duplicate section [{current}]", line=lineno)
            sections[current] = {}
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got '{line}'", line=lineno)
        if current is None:
            raise ParseError("key outside of any [section]", line=lineno)

        key, value = (part.strip() for part in line.split("=", 1))
        kind = SCHEMA[current].get(key)
        if kind is None:
            known = ", ".join(SCHEMA[current])
            raise ParseError(f"unknown key '{key}' in [{current}] (known: {known})", line=lineno)
        if key in sections[current]:
            raise ParseError(f"duplicate key '{key}' in [{current}]", line=lineno)
        try:
            sections[current][key] = (_PARSERS[kind](value), lineno)
        except ValueError as e:
            raise ParseError(f"bad value for '{key}': {e}", line=lineno) from e
    return sections


# =============================================================================
# MODEL CONSTRUCTION
# =============================================================================

def _values(section: Dict[str, Tuple[object, int]]) -> Dict[str, object]:
    return {key: value for key, (value, _) in section.items()}


def _enum(enum_cls, value, field: str):
    try:
        return enum_cls(str(value).lower())
    except ValueError:
        options = ", ".join(member.value for member in enum_cls)
        raise InvalidParameter(f"{field} must be one of {options}, got '{value}'", field=field)


def _build_process(values: Dict[str, object], allow_unsound_truncation: bool) -> ProcessSpec:
    if "kind" not in values:
        raise ValidationError("[process] requires 'kind' (ou, sr or jacobi)", field="kind")
    try:
        kind = ProcessKind.parse(values["kind"])
    except ValueError as e:
        raise InvalidParameter(str(e), field="kind") from e
    if "mu" not in values:
        raise ValidationError(f"{kind.value} process requires parameter 'mu'", field="mu")
    if "gamma" not in values:
        raise ValidationError(f"{kind.value} process requires parameter 'gamma'", field="gamma")

    fields = {key: values[key] for key in ("sigma2", "c0", "c1", "omega1", "omega2", "c") if key in values}
    spec = ProcessSpec(kind=kind, mu=values["mu"], gamma=values["gamma"],
                       allow_unsound_truncation=bool(values.get("allow_unsound_truncation", False))
                       or allow_unsound_truncation, **fields)
    return processes.validate(spec)


def _build_truncation(values: Dict[str, object], depth_override: Optional[int]) -> TruncationPolicy:
    common = {
        "kappa": values.get("kappa", DEFAULT_KAPPA),
        "convergence_tol": values.get("tol", DEFAULT_CONVERGENCE_TOL),
        "max_depth": values.get("max_depth", DEFAULT_MAX_DEPTH),
    }
    if depth_override is not None:
        return TruncationPolicy.fixed(depth_override, **common)
    mode = _enum(TruncationMode, values.get("truncation", "fixed" if "depth" in values else "auto"), "truncation")
    if mode is TruncationMode.FIXED:
        if "depth" not in values:
            raise ValidationError("fixed truncation requires 'depth'", field="depth")
        return TruncationPolicy.fixed(values["depth"], **common)
    return TruncationPolicy.auto(**common)


def _build_grid(values: Dict[str, object]) -> np.ndarray:
    if "times" in values:
        return np.array(values["times"], dtype=float)
    if "t_end" not in values:
        raise ValidationError("[solver] requires 't_end' or 'times'", field="t_end")
    n_times = values.get("n_times", 101)
    if n_times < 2 or values["t_end"] <= 0:
        raise InvalidParameter("time grid needs t_end > 0 and n_times >= 2", field="t_end")
    return np.linspace(0.0, values["t_end"], n_times)


def _build_solver(sections, allow_unsound_truncation: bool, depth_override: Optional[int]) -> SolverConfig:
    for required in ("system", "process", "solver"):
        if required not in sections:
            raise ValidationError(f"missing section [{required}]", field=required)
    system = _values(sections["system"])
    for key in ("H0", "V", "rho0"):
        if key not in system:
            raise ValidationError(f"[system] requires '{key}'", field=key)
    solver = _values(sections["solver"])
    return SolverConfig(
        H0=system["H0"],
        V=system["V"],
        process=_build_process(_values(sections["process"]), allow_unsound_truncation),
        rho0=system["rho0"],
        t_grid=_build_grid(solver),
        dt=solver.get("dt", DEFAULT_DT),
        truncation=_build_truncation(solver, depth_override),
        stepper=_enum(Stepper, solver.get("stepper", Stepper.COMPILED.value), "stepper"),
    )


def _mc_fields(values: Dict[str, object], seed_override: Optional[int]) -> Dict[str, object]:
    return {
        "trajectories": values.get("trajectories", DEFAULT_TRAJECTORIES),
        "dt_sde": values.get("dt_sde", DEFAULT_DT_SDE),
        "seed": seed_override if seed_override is not None else values.get("seed", 0),
        "boundary_mode": _enum(BoundaryMode, values.get("boundary_mode", BoundaryMode.REFLECT.value),
                               "boundary_mode"),
    }


def _build_rydberg(sections, allow_unsound_truncation: bool, depth_override: Optional[int],
                   seed_override: Optional[int]) -> RydbergConfig:
    values = _values(sections["rydberg"])
    solver = _values(sections.get("solver", {}))
    if "detunings" in values:
        detunings = np.array(values["detunings"], dtype=float)
    else:
        detunings = np.linspace(values.get("delta_min", -3.0), values.get("delta_max", 3.0),
                                values.get("n_detunings", 121))
    process = None
    if "process" in sections:
        process = _build_process(_values(sections["process"]), allow_unsound_truncation)
    noise = _enum(NoiseModel, values.get("noise", process.kind.value if process else NoiseModel.OU.value), "noise")
    if process is not None and noise.value != process.kind.value:
        raise InvalidParameter(f"noise '{noise.value}' disagrees with [process] kind '{process.kind.value}'",
                               field="noise")
    return RydbergConfig(
        J0=values.get("J0", 0.5),
        T=values.get("T", 1.0),
        detunings=detunings,
        noise=noise,
        process=process,
        dt=solver.get("dt"),
        truncation=_build_truncation(solver, depth_override),
        **_mc_fields(_values(sections.get("montecarlo", {})), seed_override),
    )


def parse_config_text(text: str, allow_unsound_truncation: bool = False, depth: Optional[int] = None,
                      seed: Optional[int] = None) -> ParsedConfig:
    sections = _read_sections(text)
    if "rydberg" in sections:
        return _build_rydberg(sections, allow_unsound_truncation, depth, seed)
    solver = _build_solver(sections, allow_unsound_truncation, depth)
    if "montecarlo" in sections:
        return McConfig(solver=solver, **_mc_fields(_values(sections["montecarlo"]), seed))
    return solver


def parse_config(path: str, allow_unsound_truncation: bool = False, depth: Optional[int] = None,
                 seed: Optional[int] = None) -> ParsedConfig:
    """
    Parse a .cfg file into a validated configuration

    Args:
        path: UTF-8 config file
        allow_unsound_truncation: Accept square-root processes with gamma <= 1
        depth: Fixed truncation depth overriding the file
        seed: Monte Carlo seed overriding the file

    Returns:
        SolverConfig, McConfig or RydbergConfig
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except (OSError, UnicodeDecodeError) as e:
        raise ParseError(f"cannot read config '{path}': {e}") from e
    config = parse_config_text(text, allow_unsound_truncation, depth, seed)
    logger.info(f"parsed {type(config).__name__} from {path}")
    return config


# =============================================================================
# CANONICAL FORM
# =============================================================================

def _fmt(value: float) -> str:
    return f"{float(value):.17g}"


def _fmt_complex(value: complex) -> str:
    return f"{value.real:.17g}{value.imag:+.17g}j"


def _fmt_matrix(M: np.ndarray) -> str:
    return "; ".join(", ".join(_fmt_complex(complex(x)) for x in row) for row in M)


def _is_uniform(grid: np.ndarray) -> bool:
    return grid.size >= 2 and np.array_equal(grid, np.linspace(grid[0], grid[-1], grid.size))


def _truncation_lines(policy: TruncationPolicy) -> List[Tuple[str, str]]:
    lines = [("truncation", policy.mode.value)]
    if policy.mode is TruncationMode.FIXED:
        lines.append(("depth", str(policy.depth)))
    lines += [("kappa", _fmt(policy.kappa)), ("tol", _fmt(policy.convergence_tol)),
              ("max_depth", str(policy.max_depth))]
    return lines


def _process_lines(spec: ProcessSpec) -> List[Tuple[str, str]]:
    lines = []
    for key, value in spec.parameters().items():
        if isinstance(value, bool):
            lines.append((key, "true" if value else "false"))
        elif isinstance(value, str):
            lines.append((key, value))
        else:
            lines.append((key, _fmt(value)))
    return lines


def _mc_lines(config) -> List[Tuple[str, str]]:
    return [("trajectories", str(config.trajectories)), ("dt_sde", _fmt(config.dt_sde)),
            ("seed", str(int(config.seed))), ("boundary_mode", config.boundary_mode.value)]


def _sections_of(config: ParsedConfig) -> Dict[str, List[Tuple[str, str]]]:
    sections: Dict[str, List[Tuple[str, str]]] = {}
    if isinstance(config, RydbergConfig):
        if config.process is not None:
            sections["process"] = _process_lines(config.process)
        solver = [] if config.dt is None else [("dt", _fmt(config.dt))]
        sections["solver"] = solver + _truncation_lines(config.truncation)
        sections["montecarlo"] = _mc_lines(config)
        rydberg = [("J0", _fmt(config.J0)), ("T", _fmt(config.T))]
        if _is_uniform(config.detunings):
            rydberg += [("delta_min", _fmt(config.detunings[0])), ("delta_max", _fmt(config.detunings[-1])),
                        ("n_detunings", str(config.detunings.size))]
        else:
            rydberg.append(("detunings", ", ".join(_fmt(d) for d in config.detunings)))
        rydberg.append(("noise", config.noise.value))
        sections["rydberg"] = rydberg
        return sections

    solver_config = config.solver if isinstance(config, McConfig) else config
    sections["system"] = [("H0", _fmt_matrix(solver_config.H0)), ("V", _fmt_matrix(solver_config.V)),
                          ("rho0", _fmt_matrix(solver_config.rho0))]
    sections["process"] = _process_lines(solver_config.process)
    grid = solver_config.t_grid
    if _is_uniform(grid):
        solver = [("t_end", _fmt(grid[-1])), ("n_times", str(grid.size))]
    else:
        solver = [("times", ", ".join(_fmt(t) for t in grid))]
    solver += [("dt", _fmt(solver_config.dt))] + _truncation_lines(solver_config.truncation)
    solver.append(("stepper", solver_config.stepper.value))
    sections["solver"] = solver
    if isinstance(config, McConfig):
        sections["montecarlo"] = _mc_lines(config)
    return sections


def canonical_config(config: ParsedConfig) -> str:
    """Canonical .cfg text; parsing it back yields an equal config hash"""
    sections = _sections_of(config)
    blocks = []
    for name in SECTION_ORDER:
        if name in sections:
            body = "\n".join(f"{key} = {value}" for key, value in sections[name])
            blocks.append(f"[{name}]\n{body}")
    return "\n\n".join(blocks) + "\n"


def config_hash(config: ParsedConfig) -> str:
    return hashlib.sha256(canonical_config(config).encode("utf-8")).hexdigest()

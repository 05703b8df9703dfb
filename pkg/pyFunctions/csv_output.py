"""
CSV emission for solver, propagator, Monte Carlo and sweep results

Header row always present; floats carry 17 significant digits. Manifest lines
start with `#` and precede the header.
"""
import csv
from typing import IO, Iterable, List, Optional, Sequence

import numpy as np

from models.manifest import RunManifest


def format_float(value: float) -> str:
    return f"{float(value):.17g}"


def _element_names(prefix: str, dim: int) -> List[str]:
    sep = "" if dim <= 10 else "_"
    names = []
    for i in range(dim):
        for j in range(dim):
            names += [f"{prefix}_{i}{sep}{j}_re", f"{prefix}_{i}{sep}{j}_im"]
    return names


def _flatten(M: np.ndarray) -> List[str]:
    values = []
    for x in np.asarray(M).reshape(-1):
        values += [format_float(x.real), format_float(x.imag)]
    return values


def density_table(times: np.ndarray, states: np.ndarray, stderr: Optional[np.ndarray] = None):
    """Header and rows `t, rho_ij_re, rho_ij_im ...[, se_ij_re, se_ij_im ...]`"""
    dim = states.shape[-1]
    header = ["t"] + _element_names("rho", dim)
    if stderr is not None:
        header += _element_names("se", dim)
    rows = []
    for k, t in enumerate(times):
        row = [format_float(t)] + _flatten(states[k])
        if stderr is not None:
            row += _flatten(stderr[k])
        rows.append(row)
    return header, rows


def map_table(times: np.ndarray, maps: np.ndarray):
    """Header and rows `t, E_ij_re, E_ij_im ...` for the d^2 x d^2 maps"""
    header = ["t"] + _element_names("E", maps.shape[-1])
    rows = [[format_float(t)] + _flatten(maps[k]) for k, t in enumerate(times)]
    return header, rows


def sweep_table(rows: Sequence[Sequence[float]]):
    with_se = bool(rows) and len(rows[0]) == 3
    header = ["delta", "population"] + (["se"] if with_se else [])
    return header, [[format_float(x) for x in row] for row in rows]


def write_csv(stream: IO[str], header: Sequence[str], rows: Iterable[Sequence[str]],
              manifest: Optional[RunManifest] = None) -> None:
    if manifest is not None:
        for line in manifest.to_lines():
            stream.write(line + "\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)

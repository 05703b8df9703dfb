#!/usr/bin/env python3
"""Print the automatically selected hierarchy depth across detunings.

Regression fixture for the truncation scan on the Rydberg problem: for each
detuning it reports the separation-bound start depth and the converged depth.

Usage:
  python scripts/scan_depth.py
  python scripts/scan_depth.py --noise jacobi --deltas 0 2 3
  python scripts/scan_depth.py --tol 1e-8
"""

from __future__ import annotations

import argparse
import os
import sys

# Add parent directory to path to import the solver packages
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from models.configs import NoiseModel, TruncationPolicy
from pyFunctions import dheom_solver, rydberg
from pyFunctions.errors import DheomError
from pyFunctions.solver_logging import configure_logging


def main(argv: list[str] | None = None) -> int:
    p = argparse.ArgumentParser(description="Automatic depth of the Rydberg hierarchy per detuning")
    p.add_argument("--noise", nargs="+", choices=["ou", "sr", "jacobi"], default=["ou", "sr", "jacobi"])
    p.add_argument("--deltas", nargs="+", type=float, default=[0.0, 1.0, 2.0, 3.0], help="detunings, rad/us")
    p.add_argument("--tol", type=float, default=1e-6, help="convergence tolerance")
    p.add_argument("--kappa", type=float, default=10.0, help="separation factor")
    args = p.parse_args(argv)

    configure_logging("WARNING")
    policy = TruncationPolicy.auto(kappa=args.kappa, convergence_tol=args.tol)
    print(f"{'noise':7s} {'delta':>7s} {'start':>6s} {'depth':>6s}")
    status = 0
    for noise in args.noise:
        config = rydberg.default_config(NoiseModel(noise), truncation=policy)
        for delta in args.deltas:
            solver = rydberg.solver_config(config, delta)
            start = dheom_solver.separation_depth(solver)
            try:
                depth = str(dheom_solver.select_depth(solver))
            except DheomError as e:
                depth = e.code
                status = 1
            print(f"{noise:7s} {delta:7.2f} {str(start):>6s} {depth:>6s}")
    return status


if __name__ == "__main__":
    raise SystemExit(main())

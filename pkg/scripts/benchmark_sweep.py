#!/usr/bin/env python3
"""Time the full reference sweep with the hierarchy solver and the Monte Carlo oracle.

Both methods run the same detunings, noise models and thread count; the ratio of
the Monte Carlo wall time to the hierarchy wall time is the speedup.

Usage:
  python scripts/benchmark_sweep.py
  python scripts/benchmark_sweep.py --threads 8 --trajectories 500
  python scripts/benchmark_sweep.py --noise ou jacobi --points 31

Env:
  DHEOM_THREADS (used when --threads is not given)
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

# Add parent directory to path to import the solver packages
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from models.configs import NoiseModel
from pyFunctions import rydberg
from pyFunctions.parallel import resolve_workers
from pyFunctions.solver_logging import configure_logging

DEFAULT_NOISES = ["ou", "sr", "jacobi"]


def _time_sweep(config, method, workers) -> float:
    started = time.perf_counter()
    rydberg.sweep(config, method, workers=workers)
    return time.perf_counter() - started


def run_benchmark(noises: list[str], trajectories: int, points: int, workers: int) -> dict:
    timings = {}
    for noise in noises:
        config = rydberg.default_config(NoiseModel(noise), trajectories=trajectories)
        if points:
            config = config.replace(detunings=np.linspace(config.detunings[0], config.detunings[-1], points))
        dheom = _time_sweep(config, rydberg.SweepMethod.DHEOM, workers)
        mc = _time_sweep(config, rydberg.SweepMethod.MONTE_CARLO, workers)
        timings[noise] = (dheom, mc)
        print(f"  {noise:7s} DHEOM {dheom:9.2f}s   Monte Carlo {mc:9.2f}s   ratio {mc / dheom:6.1f}x")
    return timings


def totals(timings: dict) -> tuple[float, float, float]:
    """Summed hierarchy and Monte Carlo wall times and their ratio"""
    dheom_total = sum(d for d, _ in timings.values())
    mc_total = sum(m for _, m in timings.values())
    return dheom_total, mc_total, mc_total / dheom_total


def main(argv: list[str] | None = None) -> int:
    p = argparse.ArgumentParser(description="Benchmark the reference sweep: hierarchy vs Monte Carlo")
    p.add_argument("--noise", nargs="+", choices=DEFAULT_NOISES, default=DEFAULT_NOISES, help="noise models")
    p.add_argument("--trajectories", type=int, default=500, help="Monte Carlo trajectories per detuning")
    p.add_argument("--points", type=int, default=0, help="detunings (default: the full 121-point grid)")
    p.add_argument("--threads", type=int, help="worker processes (default: DHEOM_THREADS or CPU count)")
    p.add_argument("--min-speedup", type=float, default=5.0, help="exit 1 below this ratio")
    args = p.parse_args(argv)

    configure_logging("WARNING")
    workers = resolve_workers(args.threads)
    print(f"Sweep benchmark: {', '.join(args.noise)}; {args.trajectories} trajectories; {workers} worker(s)")
    timings = run_benchmark(args.noise, args.trajectories, args.points, workers)

    dheom_total, mc_total, speedup = totals(timings)
    print()
    print(f"TOTAL   DHEOM {dheom_total:9.2f}s   Monte Carlo {mc_total:9.2f}s   ratio {speedup:6.1f}x")
    if speedup < args.min_speedup:
        print(f"Speedup below {args.min_speedup:g}x")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

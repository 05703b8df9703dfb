"""
Cross-check command - hierarchy against the Monte Carlo oracle
"""
import sys
import hashlib

from models.configs import NoiseModel
from pyFunctions.csv_output import format_float
from pyFunctions.errors import OracleMismatch
from pyFunctions.oracle_check import PROBLEM_SCALE, cross_check
from routes.registry import CommandGroup, build_manifest, emit

validate_group = CommandGroup('validate')

PROCESS_CHOICES = ["ou", "sr", "jacobi", "all"]


@validate_group.command(
    'validate',
    help="DHEOM vs Monte Carlo on seeded random two-level problems, with a speedup report",
    arguments=[
        (("--process",), {"choices": PROCESS_CHOICES, "default": "all", "help": "process kind (default all)"}),
        (("--problems",), {"type": int, "default": 5, "help": "random problems per process (default 5)"}),
        (("--trajectories",), {"type": int, "default": 2000, "help": "Monte Carlo trajectories (default 2000)"}),
    ],
)
def validate(args, context) -> int:
    kinds = ([NoiseModel.OU, NoiseModel.SQUARE_ROOT, NoiseModel.JACOBI] if args.process == "all"
             else [NoiseModel(args.process)])
    seed = args.seed if args.seed is not None else 0
    summary = cross_check(kinds, seed, n_problems=args.problems, trajectories=args.trajectories,
                          workers=context.workers)

    # wall times go to the manifest; the CSV body stays deterministic
    header = ["process", "problem", "depth", "max_deviation", "allowance", "propagator_deviation"]
    rows = [[r.process, str(r.index), str(r.depth), format_float(r.max_deviation), format_float(r.allowance),
             format_float(r.propagator_deviation)] for r in summary["reports"]]

    description = f"validate process={args.process} seed={seed} problems={args.problems} " \
                  f"trajectories={args.trajectories} scale={PROBLEM_SCALE}"
    diagnostics = {key: summary[key] for key in ("passed", "max_deviation", "worst_ratio",
                                                 "max_propagator_deviation", "dheom_seconds", "mc_seconds",
                                                 "speedup")}
    emit(args, header, rows, build_manifest("validate", hashlib.sha256(description.encode()).hexdigest(),
                                            diagnostics))

    print(f"max deviation {summary['max_deviation']:.3e}, worst deviation/allowance "
          f"{summary['worst_ratio']:.3f} (allowance max(3 SE, 1e-2))", file=sys.stderr)
    print(f"DHEOM {summary['dheom_seconds']:.2f}s, Monte Carlo {summary['mc_seconds']:.2f}s, "
          f"speedup {summary['speedup']:.1f}x", file=sys.stderr)

    if not summary["passed"]:
        failed = [f"{r.process}#{r.index}" for r in summary["reports"] if not r.passed]
        raise OracleMismatch(f"deviation exceeds allowance for {', '.join(failed)}")
    return 0

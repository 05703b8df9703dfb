#!/usr/bin/env python3
"""
DHEOM solver - command-line entry point

    python main.py simulate --config config/presets/dephasing_ou.cfg
    python main.py rydberg-sweep --method dheom --noise jacobi --output jacobi.csv
    python main.py validate --process jacobi --seed 7

Exit codes: 0 success, 1 validation or runtime failure, 2 configuration error.
Errors go to stderr; the last line is `ERROR <code>: <message>`.
"""
from __future__ import annotations

import sys
import argparse
import logging
from typing import List, Optional

from config.app_config import TOOL_VERSION, load_settings
from pyFunctions.errors import EXIT_FAILURE, EXIT_OK, DheomError
from pyFunctions.parallel import resolve_workers
from pyFunctions.solver_logging import configure_logging, reset_stage_log
from routes.montecarlo_routes import montecarlo_group
from routes.registry import CliParser, RunContext, add_common_arguments
from routes.rydberg_routes import rydberg_group
from routes.solver_routes import solver_group
from routes.validate_routes import validate_group

logger = logging.getLogger('cli')

# Register command groups
COMMAND_GROUPS = [solver_group, montecarlo_group, rydberg_group, validate_group]

DEFAULTS_EPILOG = """\
defaults: dt=1e-3 us (rydberg: 5e-4, Jacobi 2.5e-4), automatic truncation with kappa=10, tol=1e-6, max_depth=512;
Monte Carlo trajectories=500, dt_sde=1e-4 us, seed=0, boundary_mode=reflect;
rydberg J0=pi/2 rad/us (0.5 MHz Rabi cycle), T=1 us, 121 detunings on [-3, 3] rad/us, gamma=1.5, mu=1.
Config schema: config/README.md
"""


def build_parser() -> CliParser:
    parser = CliParser(prog="main.py", description="Diffusive hierarchical equations of motion solver",
                       epilog=DEFAULTS_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    subparsers = parser.add_subparsers(dest="command", metavar="subcommand", parser_class=CliParser)
    subparsers.required = True

    for group in COMMAND_GROUPS:
        for command in group.commands.values():
            sub = subparsers.add_parser(command.name, help=command.help, description=command.help,
                                        epilog=DEFAULTS_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
            add_common_arguments(sub)
            for flags, kwargs in command.arguments:
                sub.add_argument(*flags, **kwargs)
            sub.set_defaults(handler=command.handler)
    return parser


def run_subcommand(argv: Optional[List[str]] = None) -> int:
    """Parse argv, run one subcommand, return its exit code"""
    argv = list(sys.argv[1:] if argv is None else argv)
    settings = load_settings()
    configure_logging(settings.log_level, settings.log_dir)
    reset_stage_log()

    try:
        args = build_parser().parse_args(argv)
        context = RunContext(settings=settings, workers=resolve_workers(args.threads or settings.threads),
                             argv=argv)
        logger.info(f"running {args.command} with {context.workers} worker(s)")
        return args.handler(args, context)
    except SystemExit as e:
        # --help and --version
        return int(e.code or 0)
    except DheomError as e:
        logger.error(f"{args_command(argv)} failed: {e}")
        print(e.cli_line(), file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception(f"{args_command(argv)} crashed")
        print(f"ERROR InternalError: {e}", file=sys.stderr)
        return EXIT_FAILURE


def args_command(argv: List[str]) -> str:
    return next((a for a in argv if not a.startswith("-")), "command")


if __name__ == '__main__':
    sys.exit(run_subcommand() or EXIT_OK)

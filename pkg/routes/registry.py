"""
Command groups - blueprint-style registration of CLI subcommands
"""
import sys
import argparse
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from config.app_config import TOOL_VERSION, Settings
from models.manifest import RunManifest
from pyFunctions.csv_output import write_csv
from pyFunctions.errors import ParseError
from pyFunctions.solver_logging import wall_times

Argument = Tuple[Sequence[str], Dict[str, Any]]


@dataclass
class RunContext:
    settings: Settings
    workers: int
    argv: List[str] = field(default_factory=list)


@dataclass
class Command:
    name: str
    help: str
    handler: Callable[[argparse.Namespace, RunContext], int]
    arguments: List[Argument] = field(default_factory=list)


class CommandGroup:
    """A named set of subcommands, registered on the parser by main.py"""

    def __init__(self, name: str):
        self.name = name
        self.commands: Dict[str, Command] = {}

    def command(self, name: str, help: str = "", arguments: Optional[List[Argument]] = None):
        def decorator(func):
            self.commands[name] = Command(name=name, help=help, handler=func, arguments=arguments or [])
            return func
        return decorator


class CliParser(argparse.ArgumentParser):
    """Usage errors become ParseError so they end with the ERROR line and exit code 2"""

    def error(self, message):
        raise ParseError(f"usage: {message}")


COMMON_ARGUMENTS: List[Argument] = [
    (("--config",), {"help": "run configuration (.cfg, schema in config/README.md)"}),
    (("--output",), {"help": "CSV output path (default: stdout)"}),
    (("--manifest",), {"help": "also write the run manifest as JSON to this path"}),
    (("--seed",), {"type": int, "help": "Monte Carlo seed, overrides the config"}),
    (("--threads",), {"type": int, "help": "worker processes (default: DHEOM_THREADS, else CPU count)"}),
    (("--depth",), {"type": int, "help": "fixed hierarchy depth, overrides automatic truncation"}),
    (("--allow-unsound-truncation",), {"action": "store_true",
                                        "help": "accept square-root processes with gamma <= 1"}),
]


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    for flags, kwargs in COMMON_ARGUMENTS:
        parser.add_argument(*flags, **kwargs)


def require_config(args: argparse.Namespace) -> str:
    if not args.config:
        raise ParseError("--config is required for this subcommand")
    return args.config


def allow_unsound(args: argparse.Namespace, context: RunContext) -> bool:
    return bool(args.allow_unsound_truncation or context.settings.allow_unsound_truncation)


def build_manifest(command: str, config_hash: str, diagnostics: Dict[str, Any]) -> RunManifest:
    return RunManifest(command=command, config_hash=config_hash, tool_version=TOOL_VERSION,
                       wall_times=wall_times(), diagnostics=diagnostics)


def emit(args: argparse.Namespace, header, rows, manifest: RunManifest) -> None:
    """CSV (with manifest comment lines) to --output or stdout; JSON manifest to --manifest"""
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as f:
            write_csv(f, header, rows, manifest)
    else:
        write_csv(sys.stdout, header, rows, manifest)
        sys.stdout.flush()
    if args.manifest:
        manifest.write_json(args.manifest)

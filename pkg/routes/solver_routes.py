"""
Hierarchy solver commands - simulate and propagator
"""
from config.run_config import config_hash, parse_config
from models.configs import McConfig, RydbergConfig, SolverConfig
from pyFunctions import dheom_solver
from pyFunctions.csv_output import density_table, map_table
from pyFunctions.errors import ValidationError
from routes.registry import CommandGroup, allow_unsound, build_manifest, emit, require_config

solver_group = CommandGroup('solver')


def load_solver_config(args, context) -> SolverConfig:
    config = parse_config(require_config(args), allow_unsound_truncation=allow_unsound(args, context),
                          depth=args.depth, seed=args.seed)
    if isinstance(config, McConfig):
        return config.solver
    if isinstance(config, RydbergConfig):
        raise ValidationError("a [rydberg] config belongs to the rydberg-sweep subcommand", field="rydberg")
    return config


@solver_group.command('simulate', help="noise-averaged density matrix from the hierarchy")
def simulate(args, context) -> int:
    config = load_solver_config(args, context)
    result = dheom_solver.integrate(config)
    header, rows = density_table(result.times, result.states)
    emit(args, header, rows, build_manifest("simulate", config_hash(config), result.diagnostics))
    return 0


@solver_group.command('propagator', help="averaged dynamical map from the propagator hierarchy")
def propagator(args, context) -> int:
    config = load_solver_config(args, context)
    result = dheom_solver.integrate_propagator(config)
    header, rows = map_table(result.times, result.maps)
    emit(args, header, rows, build_manifest("propagator", config_hash(config), result.diagnostics))
    return 0

"""
Monte Carlo oracle command
"""
from config.run_config import config_hash, parse_config
from models.configs import McConfig, RydbergConfig
from pyFunctions import mc_oracle
from pyFunctions.csv_output import density_table
from pyFunctions.errors import ValidationError
from routes.registry import CommandGroup, allow_unsound, build_manifest, emit, require_config

montecarlo_group = CommandGroup('montecarlo')


@montecarlo_group.command('montecarlo', help="trajectory-averaged density matrix with standard errors")
def montecarlo(args, context) -> int:
    config = parse_config(require_config(args), allow_unsound_truncation=allow_unsound(args, context),
                          depth=args.depth, seed=args.seed)
    if isinstance(config, RydbergConfig):
        raise ValidationError("a [rydberg] config belongs to the rydberg-sweep subcommand", field="rydberg")
    if not isinstance(config, McConfig):
        config = McConfig(solver=config, seed=args.seed or 0)
    result = mc_oracle.average(config, workers=context.workers)
    header, rows = density_table(result.times, result.mean, result.stderr)
    emit(args, header, rows, build_manifest("montecarlo", config_hash(config), result.diagnostics))
    return 0

"""
Rydberg transfer sweep command (transfer spectrum data)
"""
from config.run_config import config_hash, parse_config
from models.configs import NoiseModel, RydbergConfig, TruncationPolicy
from pyFunctions import rydberg
from pyFunctions.csv_output import sweep_table
from pyFunctions.errors import ValidationError
from routes.registry import CommandGroup, allow_unsound, build_manifest, emit

rydberg_group = CommandGroup('rydberg')


def load_rydberg_config(args, context) -> RydbergConfig:
    if args.config:
        config = parse_config(args.config, allow_unsound_truncation=allow_unsound(args, context),
                              depth=args.depth, seed=args.seed)
        if not isinstance(config, RydbergConfig):
            raise ValidationError("rydberg-sweep needs a config with a [rydberg] section", field="rydberg")
    else:
        config = rydberg.default_config(NoiseModel(args.noise or NoiseModel.OU.value))
        if args.depth is not None:
            config = config.replace(truncation=TruncationPolicy.fixed(args.depth))
        if args.seed is not None:
            config = config.replace(seed=args.seed)

    if args.noise and NoiseModel(args.noise) is not config.noise:
        config = config.replace(noise=NoiseModel(args.noise), process=None, dt=None)
    if args.trajectories is not None:
        config = config.replace(trajectories=args.trajectories)
    return config


@rydberg_group.command(
    'rydberg-sweep',
    help="transfer population versus Stark detuning",
    arguments=[
        (("--method",), {"choices": [m.value for m in rydberg.SweepMethod], "default": "dheom",
                         "help": "dheom (default), mc or coherent"}),
        (("--noise",), {"choices": [n.value for n in NoiseModel],
                        "help": "none, ou, sr or jacobi (default: config, else ou)"}),
        (("--trajectories",), {"type": int, "help": "Monte Carlo trajectories per detuning (default 500)"}),
    ],
)
def rydberg_sweep(args, context) -> int:
    config = load_rydberg_config(args, context)
    method = rydberg.SweepMethod.parse(args.method)
    result = rydberg.sweep(config, method, workers=context.workers)
    header, rows = sweep_table(result.rows())
    diagnostics = {
        "method": method.value,
        "noise": result.noise.value,
        "rows": len(rows),
        "depths": [d for d in result.depths if d is not None],
        "row_wall_time_total": sum(result.wall_times),
    }
    emit(args, header, rows, build_manifest("rydberg-sweep", config_hash(config), diagnostics))
    return 0

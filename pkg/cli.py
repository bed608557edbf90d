#!/usr/bin/env python3
"""
Command-line entry point for wavelet basis experiments

    python cli.py run --config configs/mc_bspline_36.env --alpha 0.05
    python cli.py grid-search --config configs/mc_fourier_36.env --seeds 0,1,2
    python cli.py export-vf --env mountain_car --basis results/.../basis_seed_0.txt
    python cli.py eval-frozen --env mountain_car --basis results/.../basis_seed_0.txt
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from config import settings, setup_logging
from harness import build_env, evaluate_frozen, export_value_function, grid_search_alpha, run_experiment
from models import SCHEMES, ExperimentConfig
from wavelet_rl.basis import BasisSet
from wavelet_rl.exceptions import WaveletRLError

logger = logging.getLogger(__name__)

LOG_LEVELS = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']

# (flag, type, help) for every experiment field settable from the command line
CONFIG_FLAGS = [
    ('--env', str, 'environment: mountain_car or acrobot'),
    ('--scheme', str, f'basis scheme: {", ".join(SCHEMES)}'),
    ('--order', int, 'B-spline order (0, 1 or 2)'),
    ('--scale', int, 'initial dyadic scale'),
    ('--fourier-order', int, 'Fourier basis order'),
    ('--alpha', float, 'learning rate'),
    ('--gamma', float, 'discount factor'),
    ('--lambda', float, 'trace decay'),
    ('--epsilon-greedy', float, 'exploration rate'),
    ('--trace-type', str, 'accumulating or replacing'),
    ('--tau-split', float, 'AWR threshold'),
    ('--tau-combine', float, 'IBFDD threshold'),
    ('--eps', float, 'relevance decay'),
    ('--check-interval', int, 'steps between structural checks'),
    ('--max-scale', int, 'cap on atom scale'),
    ('--max-features', int, 'cap on basis size'),
    ('--episodes', int, 'episodes per run'),
    ('--max-steps', int, 'step cap per episode'),
    ('--seeds', str, 'comma-separated seeds'),
    ('--output-dir', str, 'output root (default: WAVELET_RL_OUTPUT_ROOT)'),
    ('--dt', float, 'acrobot integration step'),
    ('--integrator', str, 'acrobot integrator: rk4 or euler'),
    ('--initial-basis', str, 'resume from a saved basis'),
    ('--smoothing-window', int, 'trailing window of the aggregate curve'),
    ('--selection-window', int, 'final window for alpha selection'),
    ('--alpha-grid', str, 'comma-separated learning rates'),
    ('--value-resolution', int, 'lattice size for value export'),
    ('--slice-dims', str, 'two comma-separated state dimensions to export'),
    ('--slice-values', float, 'normalised value of the remaining dimensions'),
    ('--eval-episodes', int, 'episodes per frozen evaluation run'),
]

SWITCHES = [
    ('--diagnostics', 'diagnostics', True, 'dump relevance statistics every episode'),
    ('--no-fourier-alpha-scaling', 'fourier_alpha_scaling', False, 'use one learning rate for every Fourier term'),
]


def _config_arguments(parser: argparse.ArgumentParser):
    group = parser.add_argument_group('experiment')
    group.add_argument('--config', type=Path, help='key-value config file; flags override it')
    for flag, kind, help_text in CONFIG_FLAGS:
        group.add_argument(flag, type=kind, default=None, help=help_text)
    for flag, dest, value, help_text in SWITCHES:
        group.add_argument(flag, dest=dest, action='store_const', const=value, default=None, help=help_text)
    parser.add_argument('--workers', type=int, default=None, help='parallel seed processes')
    parser.add_argument('--log-level', default=None, help='override LOG_LEVEL')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='wavelet-rl',
        description='B-spline wavelet value-function approximation experiments',
    )
    commands = parser.add_subparsers(dest='command', required=True)

    run = commands.add_parser('run', help='train over all seeds and aggregate learning curves')
    _config_arguments(run)
    run.set_defaults(func=cmd_run)

    grid = commands.add_parser('grid-search', help='pick the learning rate with the best final-window mean')
    _config_arguments(grid)
    grid.set_defaults(func=cmd_grid_search)

    export = commands.add_parser('export-vf', help='write -max_a Q over a 2-D state lattice')
    _config_arguments(export)
    export.add_argument('--basis', type=Path, required=True, help='saved basis file')
    export.add_argument('--output', type=Path, default=None, help='CSV path (default: next to the basis)')
    export.set_defaults(func=cmd_export_vf)

    frozen = commands.add_parser('eval-frozen', help='greedy returns of a saved value function')
    _config_arguments(frozen)
    frozen.add_argument('--basis', type=Path, required=True, help='saved basis file')
    frozen.set_defaults(func=cmd_eval_frozen)

    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {}
    for flag, _, _ in CONFIG_FLAGS:
        dest = flag[2:].replace('-', '_')
        overrides[dest] = getattr(args, dest)
    for _, dest, _, _ in SWITCHES:
        overrides[dest] = getattr(args, dest)
    return ExperimentConfig.from_file(args.config, **overrides)


def cmd_run(args: argparse.Namespace, config: ExperimentConfig) -> int:
    result = run_experiment(config, workers=args.workers)
    print(f'Output: {result.output_dir}')
    for run in result.runs:
        print(
            f'  seed {run.seed}: final-{config.selection_window} mean {run.final_mean:.2f}, '
            f'basis {run.initial_basis_size} -> {run.final_basis_size}, edits {run.edits}'
        )
    return 0


def cmd_grid_search(args: argparse.Namespace, config: ExperimentConfig) -> int:
    result = grid_search_alpha(config, workers=args.workers)
    for row in result.summary:
        marker = '*' if row['selected'] else ' '
        print(f'{marker} alpha={row["alpha"]:<8g} mean={row["mean"]:.2f} std={row["std"]:.2f}')
    print(f'Selected alpha: {result.best_alpha:g} ({result.table_path})')
    return 0


def cmd_export_vf(args: argparse.Namespace, config: ExperimentConfig) -> int:
    basis = BasisSet.load(args.basis, max_size=settings.max_basis_size)
    output = args.output or args.basis.with_name(f'{args.basis.stem}_value.csv')
    export_value_function(
        basis,
        build_env(config),
        config.value_resolution,
        output,
        slice_dims=config.slice_dims,
        slice_values=config.slice_values,
        config=config,
    )
    print(f'Value grid: {output}')
    return 0


def cmd_eval_frozen(args: argparse.Namespace, config: ExperimentConfig) -> int:
    basis = BasisSet.load(args.basis, max_size=settings.max_basis_size)
    evaluation = evaluate_frozen(
        basis,
        build_env(config),
        config.eval_episodes,
        config.seeds,
        config.max_steps,
        config.agent,
    )
    print(
        f'Mean return {evaluation.mean:.2f} ({evaluation.std:.2f}) over {len(evaluation.seeds)} runs '
        f'of {evaluation.episodes} episodes'
    )
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    log_settings = settings
    if args.log_level:
        if args.log_level.upper() not in LOG_LEVELS:
            parser.error(f'--log-level must be one of {LOG_LEVELS}')
        log_settings = settings.copy(update={'log_level': args.log_level.upper()})
    setup_logging(log_settings)

    try:
        config = config_from_args(args)
        return args.func(args, config)
    except (WaveletRLError, ValidationError, ValueError) as e:
        logger.error(f'{args.command} failed: {e}')
        return 1
    except OSError as e:
        logger.error(f'I/O error: {e}')
        return 1


if __name__ == '__main__':
    sys.exit(main())

"""
Experiment orchestration: seeded multi-run learning curves, alpha grid
search, value-function export and frozen evaluation

Every CSV written here starts with one `# {json}` line carrying the
experiment config and its hash, followed by a plain header row.
"""

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from config import settings
from models import (
    AgentConfig,
    ExperimentConfig,
    ExperimentResult,
    FrozenEvaluation,
    GridSearchResult,
    RunSummary
)
from wavelet_rl.adaptive import AdaptiveController
from wavelet_rl.agent import SarsaLambdaAgent
from wavelet_rl.basis import BasisSet, build_decoupled, build_fixed_coupled, build_fourier
from wavelet_rl.envs import Environment, make_env
from wavelet_rl.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

EPISODE_COLUMNS = ['seed', 'episode', 'return', 'steps', 'basis_size', 'edits', 'cumulative_edits']
EDIT_COLUMNS = ['step', 'episode', 'kind', 'source_ids', 'new_ids', 'score', 'basis_size']
RELEVANCE_COLUMNS = ['episode', 'id', 'T', 'rho', 'obs', 'criterion']

PathLike = Union[str, Path]


# CSV files

def metadata_line(config: Optional[ExperimentConfig] = None, **extra) -> str:
    meta: Dict[str, Any] = {}
    if config is not None:
        meta['config'] = config.hash_payload()
        meta['config_hash'] = config.config_hash()
    meta.update(extra)
    return '# ' + json.dumps(meta, sort_keys=True, default=str)


def write_csv(frame: pd.DataFrame, path: PathLike, metadata: str) -> Path:
    """Write a metadata line, then the frame without its index"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='') as f:
        f.write(metadata + '\n')
        frame.to_csv(f, index=False, lineterminator='\n')
    logger.debug(f'Wrote {len(frame)} rows to {path}')
    return path


def read_csv(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path, skiprows=1)


def read_metadata(path: PathLike) -> Dict[str, Any]:
    with Path(path).open(encoding='utf-8') as f:
        first = f.readline()
    if not first.startswith('# '):
        raise ValueError(f'{path} has no metadata line')
    return json.loads(first[2:])


# Construction

def build_env(config: ExperimentConfig) -> Environment:
    return make_env(config.env, dt=config.dt, integrator=config.integrator)


def build_basis(config: ExperimentConfig, env: Environment, max_size: Optional[int] = None) -> BasisSet:
    """
    Initial basis for a scheme

    awr starts from the full coupled set; ibfdd and mawb from the
    decoupled set. A saved basis in config.initial_basis takes precedence.
    """
    max_size = max_size or settings.max_basis_size
    d, n_actions = env.state_dim, env.n_actions

    if config.initial_basis:
        basis = BasisSet.load(config.initial_basis, max_size=max_size)
        if basis.d != d or basis.n_actions != n_actions:
            raise ConfigurationError(
                f'saved basis {config.initial_basis} has d={basis.d}, actions={basis.n_actions}; '
                f'{config.env} needs d={d}, actions={n_actions}'
            )
        return basis

    if config.scheme == 'fourier':
        return build_fourier(d, config.fourier_order, n_actions, max_size)
    if config.scheme in ('bspline-coupled', 'awr'):
        return build_fixed_coupled(d, config.order, config.scale, n_actions, max_size)
    return build_decoupled(d, config.order, config.scale, n_actions, max_size)


def build_controller(config: ExperimentConfig, basis: BasisSet) -> Optional[AdaptiveController]:
    if not config.is_adaptive:
        return None
    return AdaptiveController.for_scheme(config.scheme, basis, config.adaptive)


# Runs

def final_window_mean(returns: Sequence[float], window: int) -> float:
    tail = list(returns)[-window:]
    return float(np.mean(tail)) if tail else math.nan


def run_seed(
    config: ExperimentConfig,
    seed: int,
    output_dir: PathLike,
    max_basis_size: Optional[int] = None,
    progress_interval: Optional[int] = None,
) -> RunSummary:
    """
    Train one agent for config.episodes episodes and write its files

    Writes episodes_seed_<s>.csv, basis_seed_<s>.txt and, for adaptive
    schemes, edits_seed_<s>.csv (plus relevance_seed_<s>.csv with
    diagnostics on).
    """
    output_dir = Path(output_dir)
    progress_interval = progress_interval or settings.progress_interval

    env = build_env(config)
    basis = build_basis(config, env, max_basis_size)
    controller = build_controller(config, basis)
    agent_config = config.agent.copy(update={'seed': seed})
    agent = SarsaLambdaAgent(basis, agent_config, controller, np.random.default_rng(seed))
    initial_size = len(basis)

    logger.info(
        f'Seed {seed}: {config.env}/{config.scheme}, {initial_size} functions, '
        f'alpha={agent_config.alpha}, {config.episodes} episodes'
    )

    rows = []
    relevance_rows = []
    for _ in range(config.episodes):
        record = agent.run_episode(env, config.max_steps)
        rows.append({
            'seed': seed,
            'episode': record.episode,
            'return': record.return_,
            'steps': record.steps,
            'basis_size': record.basis_size,
            'edits': record.edits,
            'cumulative_edits': record.cumulative_edits,
        })
        if config.diagnostics and controller is not None:
            relevance_rows.extend({'episode': record.episode, **row} for row in controller.relevance_rows())
        if (record.episode + 1) % progress_interval == 0:
            recent = [row['return'] for row in rows[-progress_interval:]]
            logger.info(
                f'Seed {seed} episode {record.episode + 1}/{config.episodes}: '
                f'mean return {np.mean(recent):.1f}, basis size {record.basis_size}'
            )

    meta = metadata_line(config, seed=seed)
    episodes_path = write_csv(pd.DataFrame(rows, columns=EPISODE_COLUMNS), output_dir / f'episodes_seed_{seed}.csv', meta)
    basis_path = output_dir / f'basis_seed_{seed}.txt'
    basis.dump(basis_path, metadata=meta)

    edits_path = None
    if controller is not None:
        edit_rows = [
            {
                'step': e.step,
                'episode': e.episode,
                'kind': e.kind,
                'source_ids': ' '.join(str(i) for i in e.source_ids),
                'new_ids': ' '.join(str(i) for i in e.new_ids),
                'score': e.score,
                'basis_size': e.size_after,
            }
            for e in controller.edits
        ]
        edits_path = write_csv(pd.DataFrame(edit_rows, columns=EDIT_COLUMNS), output_dir / f'edits_seed_{seed}.csv', meta)
        if config.diagnostics:
            write_csv(
                pd.DataFrame(relevance_rows, columns=RELEVANCE_COLUMNS),
                output_dir / f'relevance_seed_{seed}.csv',
                meta,
            )

    returns = [row['return'] for row in rows]
    summary = RunSummary(
        seed=seed,
        returns=returns,
        final_mean=final_window_mean(returns, config.selection_window),
        initial_basis_size=initial_size,
        final_basis_size=len(basis),
        edits=agent.total_edits,
        episodes_path=str(episodes_path),
        basis_path=str(basis_path),
        edits_path=str(edits_path) if edits_path else None,
    )
    logger.info(
        f'Seed {seed} done: final-{config.selection_window} mean {summary.final_mean:.2f}, '
        f'basis {initial_size} -> {summary.final_basis_size}'
    )
    return summary


def aggregate_returns(returns_by_seed: Dict[int, Sequence[float]], window: int) -> pd.DataFrame:
    """
    Cross-seed mean and population std of the trailing-window average return

    Early episodes average over however many episodes exist so far.
    """
    frame = pd.DataFrame({seed: pd.Series(returns, dtype=float) for seed, returns in returns_by_seed.items()})
    smoothed = frame.rolling(window, min_periods=1).mean()
    return pd.DataFrame({
        'episode': np.arange(len(frame)),
        'mean': smoothed.mean(axis=1),
        'std': smoothed.std(axis=1, ddof=0),
        'n_seeds': smoothed.count(axis=1),
    })


def experiment_dir(config: ExperimentConfig, output_root: Optional[PathLike] = None) -> Path:
    root = Path(output_root or config.output_dir or settings.output_root)
    return root / config.run_name()


def run_experiment(
    config: ExperimentConfig,
    workers: Optional[int] = None,
    output_root: Optional[PathLike] = None,
) -> ExperimentResult:
    """
    Run every seed of an experiment and aggregate the learning curves

    Seeds run in separate processes when workers > 1; the aggregate is
    written once all of them have finished.

    Args:
        config: Validated experiment config
        workers: Parallel processes, defaults to the settings value
        output_root: Parent of the per-experiment directory

    Returns:
        ExperimentResult with one RunSummary per seed, in seed order
    """
    out_dir = experiment_dir(config, output_root)
    workers = workers or settings.workers
    logger.info(f'Experiment {config.run_name()}: {len(config.seeds)} seeds -> {out_dir}')

    if workers > 1 and len(config.seeds) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(config.seeds))) as pool:
            futures = [
                pool.submit(run_seed, config, seed, out_dir, settings.max_basis_size, settings.progress_interval)
                for seed in config.seeds
            ]
            runs = [future.result() for future in futures]
    else:
        runs = [run_seed(config, seed, out_dir) for seed in config.seeds]

    aggregate = aggregate_returns({run.seed: run.returns for run in runs}, config.smoothing_window)
    aggregate_path = write_csv(
        aggregate,
        out_dir / 'aggregate.csv',
        metadata_line(config, smoothing_window=config.smoothing_window, seeds=config.seeds),
    )
    logger.info(
        f'Experiment {config.run_name()} done: final smoothed mean {aggregate["mean"].iloc[-1]:.2f} '
        f'(std {aggregate["std"].iloc[-1]:.2f})'
    )
    return ExperimentResult(
        config_hash=config.config_hash(),
        output_dir=str(out_dir),
        runs=runs,
        aggregate_path=str(aggregate_path),
    )


def select_alpha(summary: Iterable[Tuple[float, float]]) -> float:
    """Best (alpha, score) by score; ascending scan keeps the smaller alpha on ties"""
    best_alpha, best_score = None, -math.inf
    for alpha, score in sorted(summary):
        if math.isnan(score):
            continue
        if best_alpha is None or score > best_score:
            best_alpha, best_score = alpha, score
    if best_alpha is None:
        raise ConfigurationError('no learning rate produced a finite score')
    return best_alpha


def grid_search_alpha(
    config: ExperimentConfig,
    alphas: Optional[Sequence[float]] = None,
    workers: Optional[int] = None,
    output_root: Optional[PathLike] = None,
) -> GridSearchResult:
    """
    Run the experiment for every alpha and pick the best final-window mean

    The score of an alpha is the mean over seeds of each seed's mean
    return over the last selection_window episodes.
    """
    alphas = sorted(set(alphas if alphas is not None else config.alpha_grid))
    if not alphas:
        raise ConfigurationError('grid search needs at least one learning rate')
    root = Path(output_root or config.output_dir or settings.output_root)

    table = []
    summary = []
    for alpha in alphas:
        logger.info(f'Grid search {config.env}/{config.scheme}: alpha={alpha}')
        result = run_experiment(config.with_agent(alpha=alpha), workers=workers, output_root=root)
        means = [run.final_mean for run in result.runs]
        table.extend({'alpha': alpha, 'seed': run.seed, 'final_mean': run.final_mean} for run in result.runs)
        summary.append({'alpha': alpha, 'mean': float(np.mean(means)), 'std': float(np.std(means))})

    best_alpha = select_alpha((row['alpha'], row['mean']) for row in summary)
    for row in summary:
        row['selected'] = float(row['alpha'] == best_alpha)

    grid_dir = root / f'{config.env}-{config.scheme}-grid-{config.config_hash()}'
    meta = metadata_line(config, alphas=alphas, selection_window=config.selection_window, best_alpha=best_alpha)
    table_path = write_csv(pd.DataFrame(table, columns=['alpha', 'seed', 'final_mean']), grid_dir / 'grid_search.csv', meta)
    write_csv(
        pd.DataFrame(summary, columns=['alpha', 'mean', 'std', 'selected']),
        grid_dir / 'grid_search_summary.csv',
        meta,
    )
    logger.info(f'Grid search {config.env}/{config.scheme}: selected alpha={best_alpha}')
    return GridSearchResult(best_alpha=best_alpha, table=table, summary=summary, table_path=str(table_path))


# Value functions

def value_grid(
    basis: BasisSet,
    resolution: int,
    slice_dims: Tuple[int, int] = (0, 1),
    slice_values: float = 0.5,
) -> pd.DataFrame:
    """-max_a Q(s, a) over a resolution x resolution lattice of normalised states"""
    if resolution < 2:
        raise ConfigurationError(f'value grid resolution must be at least 2, got {resolution}')
    if basis.d < 2:
        raise ConfigurationError(f'value grid needs a state dimension of at least 2, got {basis.d}')
    dim_x, dim_y = slice_dims
    if dim_x == dim_y or not (0 <= dim_x < basis.d and 0 <= dim_y < basis.d):
        raise ConfigurationError(f'invalid slice dimensions {slice_dims} for d={basis.d}')

    axis = np.linspace(0.0, 1.0, resolution)
    rows = []
    s = np.full(basis.d, slice_values, dtype=float)
    for x in axis:
        for y in axis:
            s[dim_x], s[dim_y] = x, y
            rows.append((x, y, -float(np.max(basis.q_values(s)))))
    return pd.DataFrame(rows, columns=[f's{dim_x}', f's{dim_y}', 'neg_value'])


def export_value_function(
    basis: BasisSet,
    env: Environment,
    resolution: int,
    path: PathLike,
    slice_dims: Tuple[int, int] = (0, 1),
    slice_values: float = 0.5,
    config: Optional[ExperimentConfig] = None,
) -> pd.DataFrame:
    """Write the negative value function over a 2-D (slice of the) state space"""
    if basis.d != env.state_dim:
        raise ConfigurationError(f'basis has d={basis.d} but {env.name} has d={env.state_dim}')
    grid = value_grid(basis, resolution, slice_dims, slice_values)
    meta = metadata_line(
        config,
        env=env.name,
        resolution=resolution,
        slice_dims=list(slice_dims),
        slice_values=slice_values,
        basis_size=len(basis),
    )
    write_csv(grid, path, meta)
    logger.info(f'Exported {resolution}x{resolution} value grid for {env.name} to {path}')
    return grid


def evaluate_frozen(
    basis: BasisSet,
    env: Environment,
    episodes: int,
    seeds: Sequence[int],
    max_steps: int,
    agent_config: Optional[AgentConfig] = None,
) -> FrozenEvaluation:
    """
    Greedy returns of a fixed value function, one run per seed

    The basis is copied per run and never updated.
    """
    if episodes < 1 or not seeds:
        raise ConfigurationError('frozen evaluation needs at least one episode and one seed')
    if basis.d != env.state_dim or basis.n_actions != env.n_actions:
        raise ConfigurationError(
            f'basis has d={basis.d}, actions={basis.n_actions}; {env.name} needs '
            f'd={env.state_dim}, actions={env.n_actions}'
        )
    agent_config = agent_config or AgentConfig()

    run_means = []
    for seed in seeds:
        config = agent_config.copy(update={'seed': seed, 'epsilon_greedy': 0.0})
        agent = SarsaLambdaAgent(basis.copy(), config, None, np.random.default_rng(seed))
        returns = [agent.run_episode(env, max_steps, learn=False).return_ for _ in range(episodes)]
        run_means.append(float(np.mean(returns)))
        logger.info(f'Frozen evaluation seed {seed}: mean return {run_means[-1]:.2f}')

    evaluation = FrozenEvaluation(
        mean=float(np.mean(run_means)),
        std=float(np.std(run_means)),
        run_means=run_means,
        episodes=episodes,
        seeds=list(seeds),
    )
    logger.info(f'Frozen evaluation: {evaluation.mean:.2f} ({evaluation.std:.2f}) over {len(seeds)} runs')
    return evaluation


__all__ = [
    'EPISODE_COLUMNS',
    'EDIT_COLUMNS',
    'RELEVANCE_COLUMNS',
    'metadata_line',
    'write_csv',
    'read_csv',
    'read_metadata',
    'build_env',
    'build_basis',
    'build_controller',
    'final_window_mean',
    'run_seed',
    'aggregate_returns',
    'experiment_dir',
    'run_experiment',
    'select_alpha',
    'grid_search_alpha',
    'value_grid',
    'export_value_function',
    'evaluate_frozen'
]

"""
Long learning-performance checks on the shipped configs

Each test grid-searches alpha over the config's alpha_grid, 10 seeds and
500 episodes per candidate. Run with `pytest --runslow`; set WORKERS to
spread seeds over processes.
"""

from pathlib import Path

import numpy as np
import pytest

from config import settings
from harness import grid_search_alpha, run_experiment
from models import ExperimentConfig

CONFIG_DIR = Path(__file__).resolve().parent.parent / 'configs'

pytestmark = pytest.mark.slow


def tuned(name, tmp_path):
    """Grid-search alpha for a shipped config; return the config and per-seed final means"""
    config = ExperimentConfig.from_file(CONFIG_DIR / name, output_dir=str(tmp_path))
    result = grid_search_alpha(config, workers=settings.workers)
    means = [row['final_mean'] for row in result.table if row['alpha'] == result.best_alpha]
    return config.with_agent(alpha=result.best_alpha), np.array(means)


def test_mountain_car_bspline_competes_with_fourier(tmp_path):
    _, bspline = tuned('mc_bspline_36.env', tmp_path)
    _, fourier = tuned('mc_fourier_36.env', tmp_path)
    assert np.sum(bspline >= -200.0) >= 8
    assert abs(bspline.mean() - fourier.mean()) <= 0.3 * abs(fourier.mean())


@pytest.mark.parametrize('name', ['acrobot_decoupled.env', 'acrobot_bspline.env'])
def test_acrobot_bspline_schemes_learn(name, tmp_path):
    _, means = tuned(name, tmp_path)
    assert np.sum(means >= -250.0) >= 8


def test_mawb_matches_fixed_mountain_car(tmp_path):
    _, fixed = tuned('mc_bspline_36.env', tmp_path)
    config = ExperimentConfig.from_file(CONFIG_DIR / 'mc_mawb.env', output_dir=str(tmp_path))
    result = run_experiment(config, workers=settings.workers)
    adaptive = np.array(result.final_means)

    assert abs(adaptive.mean() - fixed.mean()) <= fixed.std()
    n, j = config.order, config.scale
    for run in result.runs:
        assert run.initial_basis_size == (n + 2 ** j) * 2
        assert run.final_basis_size < config.adaptive.max_features

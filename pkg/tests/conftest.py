import os

import numpy as np
import pytest

os.environ.setdefault('WAVELET_RL_ENV', 'testing')

from models import AdaptiveConfig, AgentConfig, ExperimentConfig  # noqa: E402
from wavelet_rl.envs import Acrobot, MountainCar  # noqa: E402


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False, help='run slow learning tests')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def mountain_car():
    return MountainCar()


@pytest.fixture
def acrobot():
    return Acrobot()


@pytest.fixture
def agent_config():
    return AgentConfig(alpha=0.05, gamma=1.0, lambda_=0.9, epsilon_greedy=0.0)


@pytest.fixture
def adaptive_config():
    return AdaptiveConfig(tau_split=0.0, tau_combine=0.0, check_interval=1, max_scale=6, max_features=10000)


@pytest.fixture
def tiny_config(tmp_path):
    """A mountain-car experiment small enough to run in a unit test"""
    return ExperimentConfig.from_flat({
        'env': 'mountain_car',
        'scheme': 'bspline-coupled',
        'order': 1,
        'scale': 1,
        'alpha': 0.05,
        'episodes': 3,
        'max_steps': 60,
        'seeds': '0,1',
        'smoothing_window': 2,
        'selection_window': 2,
        'output_dir': str(tmp_path / 'results'),
    })

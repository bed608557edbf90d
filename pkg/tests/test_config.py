"""Tests for process settings and experiment configuration."""

from pathlib import Path

import pytest
from pydantic import ValidationError

import config as config_module
from models import DEFAULT_MAX_STEPS, AgentConfig, ExperimentConfig
from wavelet_rl.exceptions import ConfigurationError

CONFIG_DIR = Path(__file__).resolve().parent.parent / 'configs'


class TestSettings:
    def test_profiles(self):
        assert isinstance(config_module.get_settings('development'), config_module.DevelopmentSettings)
        assert isinstance(config_module.get_settings('production'), config_module.ProductionSettings)
        testing = config_module.get_settings('testing')
        assert testing.log_level == 'WARNING'
        assert testing.workers == 1
        assert not testing.enable_file_logging

    def test_default_profile_is_development(self, monkeypatch):
        monkeypatch.delenv('WAVELET_RL_ENV', raising=False)
        assert isinstance(config_module.get_settings(), config_module.DevelopmentSettings)
        monkeypatch.setenv('WAVELET_RL_ENV', 'production')
        assert isinstance(config_module.get_settings(), config_module.ProductionSettings)

    def test_environment_overrides(self, monkeypatch):
        monkeypatch.setenv('WAVELET_RL_OUTPUT_ROOT', '/tmp/wavelet-out')
        monkeypatch.setenv('WORKERS', '4')
        settings = config_module.Settings()
        assert settings.output_root == '/tmp/wavelet-out'
        assert settings.workers == 4

    def test_log_level_is_normalised(self):
        assert config_module.Settings(log_level='debug').log_level == 'DEBUG'
        with pytest.raises(ValidationError):
            config_module.Settings(log_level='LOUD')

    @pytest.mark.parametrize('field', ['workers', 'max_basis_size', 'smoothing_window'])
    def test_positive_fields(self, field):
        with pytest.raises(ValidationError):
            config_module.Settings(**{field: 0})

    def test_alpha_grid(self):
        assert config_module.Settings(default_alpha_grid='0.1, 0.01').alpha_grid_list == [0.01, 0.1]
        for bad in ('', 'fast', '0.1,-0.2'):
            with pytest.raises(ValidationError):
                config_module.Settings(default_alpha_grid=bad)

    def test_setup_logging_writes_file(self, tmp_path):
        settings = config_module.TestSettings(enable_file_logging=True, log_file=str(tmp_path / 'logs' / 'run.log'))
        config_module.setup_logging(settings)
        assert (tmp_path / 'logs').is_dir()
        config_module.setup_logging(config_module.TestSettings())


class TestAgentConfig:
    def test_lambda_alias(self):
        assert AgentConfig(**{'lambda': 0.5}).lambda_ == 0.5
        assert AgentConfig(lambda_=0.5).dict(by_alias=True)['lambda'] == 0.5

    @pytest.mark.parametrize('fields', [
        {'alpha': 0.0},
        {'gamma': 1.5},
        {'lambda_': -0.1},
        {'epsilon_greedy': 2.0},
        {'trace_type': 'dutch'},
    ])
    def test_invalid(self, fields):
        with pytest.raises(ValidationError):
            AgentConfig(**fields)


class TestExperimentConfig:
    def test_defaults(self):
        config = ExperimentConfig()
        assert (config.env, config.scheme, config.order, config.scale) == ('mountain_car', 'bspline-coupled', 2, 2)
        assert config.seeds == list(range(10))
        assert config.max_steps == DEFAULT_MAX_STEPS['mountain_car']
        assert config.smoothing_window == config_module.settings.smoothing_window
        assert config.alpha_grid == config_module.settings.alpha_grid_list
        assert not config.is_adaptive

    def test_step_cap_follows_environment(self):
        assert ExperimentConfig(env='acrobot').max_steps == 1000
        assert ExperimentConfig(env='acrobot', max_steps=50).max_steps == 50

    def test_flat_keys_are_routed(self):
        config = ExperimentConfig.from_flat({
            'ENV': 'acrobot',
            'scheme': 'mawb',
            'Alpha': '0.02',
            'lambda': '0.5',
            'tau-split': '1.5',
            'check_interval': '10',
            'seeds': '3,1,2',
            'alpha_grid': '0.1,0.01',
            'slice_dims': '1,3',
            'order': None,
        })
        assert config.agent.alpha == 0.02 and config.agent.lambda_ == 0.5
        assert config.adaptive.tau_split == 1.5 and config.adaptive.check_interval == 10
        assert config.seeds == [3, 1, 2]
        assert config.alpha_grid == [0.01, 0.1]
        assert config.slice_dims == (1, 3)
        assert config.order == 2
        assert config.is_adaptive

    @pytest.mark.parametrize('values', [
        {'colour': 'blue'},
        {'scheme': 'tile-coding'},
        {'env': 'cartpole'},
        {'order': 3},
        {'seeds': ''},
        {'seeds': '1,1'},
        {'alpha': '-1'},
        {'scale': 7, 'max_scale': 6},
        {'slice_dims': '0,2'},
        {'slice_dims': '1,1'},
        {'integrator': 'leapfrog'},
    ])
    def test_invalid_flat_values(self, values):
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_flat(values)

    def test_fourier_ignores_scale_cap(self):
        config = ExperimentConfig.from_flat({'scheme': 'fourier', 'scale': 7, 'max_scale': 0})
        assert config.scale == 7

    def test_hash(self, tmp_path):
        a = ExperimentConfig.from_flat({'alpha': 0.05, 'output_dir': str(tmp_path / 'a')})
        b = ExperimentConfig.from_flat({'alpha': 0.05, 'output_dir': str(tmp_path / 'b')})
        c = ExperimentConfig.from_flat({'alpha': 0.1})
        assert a.config_hash() == b.config_hash()
        assert a.config_hash() != c.config_hash()
        assert len(a.config_hash()) == 12
        assert a.run_name() == f'mountain_car-bspline-coupled-{a.config_hash()}'

    def test_with_agent(self):
        config = ExperimentConfig(agent=AgentConfig(alpha=0.05, lambda_=0.5))
        updated = config.with_agent(alpha=0.2)
        assert updated.agent.alpha == 0.2 and updated.agent.lambda_ == 0.5
        assert config.agent.alpha == 0.05
        with pytest.raises(ValidationError):
            config.with_agent(alpha=-1.0)

    def test_from_file_with_overrides(self, tmp_path):
        path = tmp_path / 'exp.env'
        path.write_text('# comment\nENV=acrobot\nSCHEME=bspline-decoupled\nALPHA=0.01\nSEEDS=0,1\n')
        config = ExperimentConfig.from_file(path, alpha=0.5, episodes=None)
        assert config.env == 'acrobot' and config.scheme == 'bspline-decoupled'
        assert config.agent.alpha == 0.5
        assert config.episodes == 500

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_file(tmp_path / 'nope.env')

    @pytest.mark.parametrize('path', sorted(CONFIG_DIR.glob('*.env')), ids=lambda p: p.stem)
    def test_shipped_configs_load(self, path):
        config = ExperimentConfig.from_file(path)
        assert config.seeds == list(range(10))
        assert config.episodes == 500

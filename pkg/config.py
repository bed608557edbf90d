"""
Configuration management for wavelet basis experiments
"""

import logging
import os
from pathlib import Path
from typing import List, Optional

from pydantic import BaseSettings, Field, validator


class Settings(BaseSettings):
    """Process-wide settings with validation"""

    # Output Configuration
    output_root: str = Field('results', env='WAVELET_RL_OUTPUT_ROOT')

    # Logging Configuration
    log_level: str = Field('INFO', env='LOG_LEVEL')
    log_format: str = Field('%(asctime)s - %(name)s - %(levelname)s - %(message)s', env='LOG_FORMAT')
    log_file: Optional[str] = Field('logs/wavelet_rl.log', env='LOG_FILE')
    enable_file_logging: bool = Field(False, env='ENABLE_FILE_LOGGING')

    # Basis Configuration
    max_basis_size: int = Field(10 ** 6, env='MAX_BASIS_SIZE')

    # Execution Configuration
    workers: int = Field(1, env='WORKERS')
    progress_interval: int = Field(50, env='PROGRESS_INTERVAL')

    # Reporting Configuration
    smoothing_window: int = Field(20, env='SMOOTHING_WINDOW')
    selection_window: int = Field(100, env='SELECTION_WINDOW')
    default_alpha_grid: str = Field('0.0005,0.001,0.005,0.01,0.05,0.1', env='DEFAULT_ALPHA_GRID')

    @validator('log_level')
    def validate_log_level(cls, v):
        valid_levels = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']
        if v.upper() not in valid_levels:
            raise ValueError(f'log_level must be one of {valid_levels}')
        return v.upper()

    @validator('max_basis_size', 'workers', 'progress_interval', 'smoothing_window', 'selection_window')
    def validate_positive(cls, v, field):
        if v < 1:
            raise ValueError(f'{field.name} must be at least 1')
        return v

    @validator('default_alpha_grid')
    def validate_alpha_grid(cls, v):
        try:
            alphas = [float(a) for a in v.split(',') if a.strip()]
        except ValueError:
            raise ValueError(f'default_alpha_grid must be a comma-separated list of numbers, got {v!r}')
        if not alphas or any(a <= 0 for a in alphas):
            raise ValueError('default_alpha_grid needs at least one positive learning rate')
        return v

    @property
    def alpha_grid_list(self) -> List[float]:
        """Get the default alpha grid as a sorted list"""
        return sorted(float(a) for a in self.default_alpha_grid.split(',') if a.strip())

    def create_directories(self):
        """Create necessary directories"""
        if self.enable_file_logging and self.log_file:
            Path(self.log_file).parent.mkdir(parents=True, exist_ok=True)

    class Config:
        env_file = '.env'
        env_file_encoding = 'utf-8'
        case_sensitive = False


class DevelopmentSettings(Settings):
    """Development-specific settings"""
    log_level: str = 'DEBUG'


class ProductionSettings(Settings):
    """Long reproduction runs"""
    log_level: str = 'INFO'
    enable_file_logging: bool = True


class TestSettings(Settings):
    """Test-specific settings"""
    log_level: str = 'WARNING'
    enable_file_logging: bool = False
    workers: int = 1


def get_settings(env: Optional[str] = None) -> Settings:
    """
    Get settings based on environment

    Args:
        env: Environment name ('development', 'production', 'testing');
            WAVELET_RL_ENV, then 'development', when omitted

    Returns:
        Settings instance
    """
    env = env or os.getenv('WAVELET_RL_ENV', 'development')

    if env == 'development':
        return DevelopmentSettings()
    elif env == 'testing':
        return TestSettings()
    else:
        return ProductionSettings()


def setup_logging(config: Settings):
    """Configure root logging once: console plus optional log file"""
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if config.enable_file_logging and config.log_file:
        config.create_directories()
        handlers.append(logging.FileHandler(config.log_file, encoding='utf-8'))
    logging.basicConfig(
        level=getattr(logging, config.log_level),
        format=config.log_format,
        handlers=handlers,
        force=True
    )


# Global settings instance
settings = get_settings()


__all__ = [
    'settings',
    'get_settings',
    'setup_logging',
    'Settings',
    'DevelopmentSettings',
    'ProductionSettings',
    'TestSettings'
]

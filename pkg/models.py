import hashlib
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from dotenv import dotenv_values
from pydantic import BaseModel, Field, ValidationError, root_validator, validator

from config import settings
from wavelet_rl.agent import ACCUMULATING, REPLACING
from wavelet_rl.envs import ENVIRONMENTS, INTEGRATORS
from wavelet_rl.exceptions import ConfigurationError
from wavelet_rl.wavelet import SUPPORTED_ORDERS

FIXED_SCHEMES = ('bspline-coupled', 'bspline-decoupled', 'fourier')
ADAPTIVE_SCHEMES = ('awr', 'ibfdd', 'mawb')
SCHEMES = FIXED_SCHEMES + ADAPTIVE_SCHEMES

# Step caps per environment when the config leaves max_steps unset
DEFAULT_MAX_STEPS = {
    'mountain_car': 2000,
    'acrobot': 1000
}


def _split_list(v):
    if isinstance(v, str):
        return [item.strip() for item in v.split(',') if item.strip()]
    return v


class AgentConfig(BaseModel):
    """Pydantic model for Sarsa(lambda) hyperparameters"""
    alpha: float = Field(0.01, gt=0.0, description="Learning rate")
    gamma: float = Field(1.0, gt=0.0, le=1.0, description="Discount factor")
    lambda_: float = Field(0.9, ge=0.0, le=1.0, alias='lambda', description="Trace decay")
    epsilon_greedy: float = Field(0.0, ge=0.0, le=1.0, description="Exploration rate")
    seed: int = Field(0, ge=0, description="Run seed")
    trace_type: str = Field(ACCUMULATING, description="Eligibility trace variant")
    fourier_alpha_scaling: bool = Field(True, description="Scale alpha by 1/||c|| for Fourier terms")

    @validator('trace_type')
    def validate_trace_type(cls, v):
        valid_types = [ACCUMULATING, REPLACING]
        if v not in valid_types:
            raise ValueError(f'trace_type must be one of {valid_types}')
        return v

    class Config:
        allow_population_by_field_name = True


class AdaptiveConfig(BaseModel):
    """Pydantic model for structural-change thresholds and caps"""
    tau_split: float = Field(math.inf, ge=0.0, description="AWR threshold on C")
    tau_combine: float = Field(math.inf, ge=0.0, description="IBFDD threshold on |rho|")
    eps: float = Field(0.99, gt=0.0, lt=1.0, description="Relevance decay")
    check_interval: int = Field(100, ge=1, description="Steps between structural checks")
    max_scale: int = Field(6, ge=0, description="Cap on atom scale")
    max_features: int = Field(10000, ge=1, description="Cap on basis size")


AGENT_KEYS = ('alpha', 'gamma', 'lambda', 'epsilon_greedy', 'trace_type', 'fourier_alpha_scaling')
ADAPTIVE_KEYS = tuple(AdaptiveConfig.__fields__)


class ExperimentConfig(BaseModel):
    """Pydantic model for one experiment: environment, basis scheme, agent, budget"""
    env: str = Field('mountain_car', description="Environment name")
    scheme: str = Field('bspline-coupled', description="Basis scheme")
    order: int = Field(2, description="B-spline order")
    scale: int = Field(2, ge=0, description="Initial dyadic scale")
    fourier_order: int = Field(5, ge=0, description="Fourier basis order")
    agent: AgentConfig = Field(default_factory=AgentConfig)
    adaptive: AdaptiveConfig = Field(default_factory=AdaptiveConfig)
    episodes: int = Field(500, ge=1, description="Episodes per run")
    max_steps: Optional[int] = Field(None, ge=1, description="Step cap per episode")
    seeds: List[int] = Field(default_factory=lambda: list(range(10)), description="Run seeds")
    output_dir: Optional[str] = Field(None, description="Output directory, defaults to the settings root")
    dt: float = Field(0.2, gt=0.0, description="Acrobot integration step")
    integrator: str = Field('rk4', description="Acrobot integrator")
    initial_basis: Optional[str] = Field(None, description="Saved basis to resume from")
    diagnostics: bool = Field(False, description="Dump per-episode relevance statistics")
    smoothing_window: int = Field(
        default_factory=lambda: settings.smoothing_window, ge=1, description="Trailing window for learning curves"
    )
    selection_window: int = Field(
        default_factory=lambda: settings.selection_window, ge=1, description="Final window for alpha selection"
    )
    alpha_grid: List[float] = Field(
        default_factory=lambda: settings.alpha_grid_list,
        description="Learning rates for the grid search"
    )
    value_resolution: int = Field(50, ge=2, description="Lattice size for value exports")
    slice_dims: Tuple[int, int] = Field((0, 1), description="State dimensions of exported slices")
    slice_values: float = Field(0.5, ge=0.0, le=1.0, description="Normalised value of the other dimensions")
    eval_episodes: int = Field(100, ge=1, description="Episodes per frozen evaluation run")

    @validator('env')
    def validate_env(cls, v):
        if v not in ENVIRONMENTS:
            raise ValueError(f'env must be one of {sorted(ENVIRONMENTS)}')
        return v

    @validator('scheme')
    def validate_scheme(cls, v):
        if v not in SCHEMES:
            raise ValueError(f'scheme must be one of {list(SCHEMES)}')
        return v

    @validator('order')
    def validate_order(cls, v):
        if v not in SUPPORTED_ORDERS:
            raise ValueError(f'order must be one of {list(SUPPORTED_ORDERS)}')
        return v

    @validator('integrator')
    def validate_integrator(cls, v):
        if v not in INTEGRATORS:
            raise ValueError(f'integrator must be one of {sorted(INTEGRATORS)}')
        return v

    @validator('seeds', 'alpha_grid', 'slice_dims', pre=True)
    def split_comma_lists(cls, v):
        return _split_list(v)

    @validator('seeds')
    def validate_seeds(cls, v):
        if not v:
            raise ValueError('seeds cannot be empty')
        if len(set(v)) != len(v):
            raise ValueError('seeds must be distinct')
        return v

    @validator('alpha_grid')
    def validate_alpha_grid(cls, v):
        if not v or any(a <= 0 for a in v):
            raise ValueError('alpha_grid needs at least one positive learning rate')
        return sorted(v)

    @root_validator(skip_on_failure=True)
    def validate_scheme_parameters(cls, values):
        env, scheme = values['env'], values['scheme']
        if values.get('max_steps') is None:
            values['max_steps'] = DEFAULT_MAX_STEPS[env]
        if scheme != 'fourier' and values['adaptive'].max_scale < values['scale']:
            raise ValueError('adaptive.max_scale must be >= scale')
        slice_dims = values['slice_dims']
        d = ENVIRONMENTS[env]().state_dim
        if slice_dims[0] == slice_dims[1] or not all(0 <= s < d for s in slice_dims):
            raise ValueError(f'slice_dims must be two distinct dimensions below {d}')
        return values

    @property
    def is_adaptive(self) -> bool:
        return self.scheme in ADAPTIVE_SCHEMES

    def hash_payload(self) -> Dict[str, Any]:
        """Everything that determines results; the output location is excluded"""
        return self.dict(by_alias=True, exclude={'output_dir'})

    def config_hash(self) -> str:
        payload = json.dumps(self.hash_payload(), sort_keys=True, default=str)
        return hashlib.sha256(payload.encode('utf-8')).hexdigest()[:12]

    def run_name(self) -> str:
        return f'{self.env}-{self.scheme}-{self.config_hash()}'

    def with_agent(self, **updates) -> 'ExperimentConfig':
        """Copy with agent fields replaced, revalidated"""
        agent = AgentConfig(**{**self.agent.dict(by_alias=True), **updates})
        return self.copy(update={'agent': agent})

    @classmethod
    def from_flat(cls, values: Mapping[str, Any]) -> 'ExperimentConfig':
        """
        Build a config from flat key-value pairs

        Agent keys (alpha, gamma, lambda, ...) and adaptive keys (tau_split,
        ...) are routed into the nested models; None values are ignored.

        Raises:
            ConfigurationError: on unknown keys or failed validation
        """
        top: Dict[str, Any] = {}
        agent: Dict[str, Any] = {}
        adaptive: Dict[str, Any] = {}
        for raw_key, value in values.items():
            if value is None:
                continue
            key = raw_key.strip().lower().replace('-', '_')
            if key in ('lambda', 'lambda_'):
                agent['lambda'] = value
            elif key in AGENT_KEYS:
                agent[key] = value
            elif key in ADAPTIVE_KEYS:
                adaptive[key] = value
            elif key in cls.__fields__ and key not in ('agent', 'adaptive'):
                top[key] = value
            else:
                raise ConfigurationError(f'unknown configuration key {raw_key!r}')
        try:
            return cls(agent=AgentConfig(**agent), adaptive=AdaptiveConfig(**adaptive), **top)
        except ValidationError as e:
            raise ConfigurationError(f'invalid experiment configuration: {e}') from e

    @classmethod
    def from_file(cls, path: Union[str, Path, None] = None, **overrides) -> 'ExperimentConfig':
        """Read a key-value config file (dotenv syntax), then apply overrides"""
        values: Dict[str, Any] = {}
        if path is not None:
            path = Path(path)
            if not path.is_file():
                raise ConfigurationError(f'config file not found: {path}')
            values.update(dotenv_values(path))
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_flat(values)


class RunSummary(BaseModel):
    """Pydantic model for one seed's outcome"""
    seed: int = Field(..., description="Run seed")
    returns: List[float] = Field(..., description="Return per episode")
    final_mean: float = Field(..., description="Mean return over the selection window")
    initial_basis_size: int = Field(..., ge=0)
    final_basis_size: int = Field(..., ge=0)
    edits: int = Field(0, ge=0, description="Structural edits over the run")
    episodes_path: str = Field(..., description="Per-episode CSV")
    basis_path: str = Field(..., description="Saved final basis")
    edits_path: Optional[str] = Field(None, description="Edit log CSV for adaptive schemes")


class ExperimentResult(BaseModel):
    """Pydantic model for a full multi-seed experiment"""
    config_hash: str
    output_dir: str
    runs: List[RunSummary]
    aggregate_path: str

    @property
    def final_means(self) -> List[float]:
        return [run.final_mean for run in self.runs]


class GridSearchResult(BaseModel):
    """Pydantic model for an alpha grid search"""
    best_alpha: float
    table: List[Dict[str, float]] = Field(..., description="Rows of (alpha, seed, final_mean)")
    summary: List[Dict[str, float]] = Field(..., description="Rows of (alpha, mean, std)")
    table_path: str

    @validator('table')
    def validate_table(cls, v):
        if not v:
            raise ValueError('table cannot be empty')
        return v


class FrozenEvaluation(BaseModel):
    """Pydantic model for greedy evaluation of a fixed value function"""
    mean: float
    std: float
    run_means: List[float]
    episodes: int = Field(..., ge=1)
    seeds: List[int]


__all__ = [
    'SCHEMES',
    'FIXED_SCHEMES',
    'ADAPTIVE_SCHEMES',
    'DEFAULT_MAX_STEPS',
    'AgentConfig',
    'AdaptiveConfig',
    'ExperimentConfig',
    'RunSummary',
    'ExperimentResult',
    'GridSearchResult',
    'FrozenEvaluation'
]

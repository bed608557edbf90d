"""
Wavelet basis functions for linear value-function approximation
"""

from .wavelet import (
    WaveletAtom,
    RefinementMask,
    eval_bspline_raw,
    normalization_constant,
    eval_atom,
    refinement_mask,
    atom_support
)

from .basis import (
    FunctionKind,
    BasisFunction,
    BasisSet,
    build_fixed_coupled,
    build_decoupled,
    build_fourier,
    support_volume
)

from .relevance import (
    RelevanceStats,
    record,
    rho,
    obs,
    criterion
)

from .adaptive import (
    CandidateConjunction,
    StructuralEdit,
    AdaptiveController,
    split_feature,
    combine_features,
    awr_check,
    ibfdd_check,
    mawb_step
)

from .envs import (
    EnvState,
    Environment,
    MountainCar,
    Acrobot,
    make_env
)

from .agent import (
    TDSample,
    EpisodeRecord,
    SarsaLambdaAgent,
    q_value,
    select_action,
    sarsa_step,
    run_episode
)

from .exceptions import (
    WaveletRLError,
    UnsupportedOrderError,
    DimensionMismatchError,
    BasisSizeError,
    UnknownFeatureError,
    StructuralEditError,
    FeatureKindError,
    TerminalStateError,
    ConfigurationError
)

__all__ = [
    # Wavelets
    'WaveletAtom',
    'RefinementMask',
    'eval_bspline_raw',
    'normalization_constant',
    'eval_atom',
    'refinement_mask',
    'atom_support',

    # Bases
    'FunctionKind',
    'BasisFunction',
    'BasisSet',
    'build_fixed_coupled',
    'build_decoupled',
    'build_fourier',
    'support_volume',

    # Relevance
    'RelevanceStats',
    'record',
    'rho',
    'obs',
    'criterion',

    # Adaptive edits
    'CandidateConjunction',
    'StructuralEdit',
    'AdaptiveController',
    'split_feature',
    'combine_features',
    'awr_check',
    'ibfdd_check',
    'mawb_step',

    # Environments
    'EnvState',
    'Environment',
    'MountainCar',
    'Acrobot',
    'make_env',

    # Agent
    'TDSample',
    'EpisodeRecord',
    'SarsaLambdaAgent',
    'q_value',
    'select_action',
    'sarsa_step',
    'run_episode',

    # Errors
    'WaveletRLError',
    'UnsupportedOrderError',
    'DimensionMismatchError',
    'BasisSizeError',
    'UnknownFeatureError',
    'StructuralEditError',
    'FeatureKindError',
    'TerminalStateError',
    'ConfigurationError'
]

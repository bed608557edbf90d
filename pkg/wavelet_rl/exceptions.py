"""
Exception hierarchy for the wavelet basis library
"""


class WaveletRLError(Exception):
    """Base class for every error raised by the library"""


class UnsupportedOrderError(WaveletRLError, ValueError):
    """Raised when a B-spline order outside 0..2 is requested"""


class DimensionMismatchError(WaveletRLError, ValueError):
    """Raised when a state vector does not match the basis dimension"""


class BasisSizeError(WaveletRLError, ValueError):
    """Raised when a basis would exceed the configured size cap"""


class UnknownFeatureError(WaveletRLError, KeyError):
    """Raised when a function id is not present in a basis"""


class StructuralEditError(WaveletRLError):
    """Raised when a split or combine violates its preconditions"""


class FeatureKindError(WaveletRLError, TypeError):
    """Raised when an operation is applied to the wrong kind of basis function"""


class TerminalStateError(WaveletRLError, RuntimeError):
    """Raised when stepping an environment from a terminal state"""


class ConfigurationError(WaveletRLError, ValueError):
    """Raised for invalid experiment configuration"""


__all__ = [
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

"""
Incremental relevance estimates for structural basis changes

H(phi, E) = (T - 1) / T * |Omega| * (1 - eps) * sum_t eps^(T - t) E(s_t) phi(s_t)

rho uses E = delta, the observed error O uses E = |delta| and the split
criterion is C = O - rho. The sum is kept as an exponential accumulator
in which the newest sample has weight 1; the prefactors are applied when
the estimates are read.
"""

import logging
from dataclasses import dataclass
from typing import Optional

logger = logging.getLogger(__name__)

DEFAULT_EPS = 0.99

# Slack for floating-point rounding in the O >= |rho| check
_INVARIANT_TOL = 1e-9


def _check_eps(eps: float) -> float:
    if not 0.0 < eps < 1.0:
        raise ValueError(f'relevance decay eps must lie in (0, 1), got {eps}')
    return eps


@dataclass
class RelevanceStats:
    """
    Per-function accumulators

    Attributes:
        omega: Support volume of the tracked function, clipped to the unit box
        eps: Decay applied to older samples
        T: Number of samples where the function was nonzero
        acc_rho: Sum of eps^(T - t) * delta_t * phi(s_t)
        acc_obs: Sum of eps^(T - t) * |delta_t| * phi(s_t)
    """
    omega: float = 1.0
    eps: float = DEFAULT_EPS
    T: int = 0
    acc_rho: float = 0.0
    acc_obs: float = 0.0

    def __post_init__(self):
        _check_eps(self.eps)

    def record(self, phi_value: float, delta: float) -> 'RelevanceStats':
        return record(self, phi_value, delta)

    @property
    def rho(self) -> float:
        return rho(self)

    @property
    def obs(self) -> float:
        return obs(self)

    @property
    def criterion(self) -> float:
        return criterion(self)


def record(stats: RelevanceStats, phi_value: float, delta: float, eps: Optional[float] = None) -> RelevanceStats:
    """
    Fold one sample into the accumulators in place

    Args:
        stats: Statistics to update
        phi_value: Nonzero feature value at s_t
        delta: TD error at step t
        eps: Decay in (0, 1); defaults to stats.eps and must equal it when given

    Returns:
        The same stats object, for chaining

    Raises:
        ValueError: eps is outside (0, 1) or differs from the decay the
            estimates are read with
    """
    if eps is None:
        eps = stats.eps
    _check_eps(eps)
    if eps != stats.eps:
        raise ValueError(f'record called with eps={eps} on statistics decaying with eps={stats.eps}')
    stats.T += 1
    stats.acc_rho = eps * stats.acc_rho + delta * phi_value
    stats.acc_obs = eps * stats.acc_obs + abs(delta) * phi_value
    if phi_value > 0.0:
        slack = _INVARIANT_TOL * max(1.0, stats.acc_obs)
        if stats.acc_obs + slack < stats.acc_rho or stats.acc_obs + slack < -stats.acc_rho:
            raise AssertionError(
                f'observed error {stats.acc_obs} below |rho| {abs(stats.acc_rho)} '
                f'after sample phi={phi_value}, delta={delta}'
            )
    return stats


def _prefactor(stats: RelevanceStats) -> float:
    if stats.T <= 1:
        return 0.0
    return (stats.T - 1) / stats.T * stats.omega * (1.0 - stats.eps)


def rho(stats: RelevanceStats) -> float:
    """Estimate of <phi, delta>"""
    return _prefactor(stats) * stats.acc_rho


def obs(stats: RelevanceStats) -> float:
    """Estimate of <phi, |delta|>"""
    return _prefactor(stats) * stats.acc_obs


def criterion(stats: RelevanceStats) -> float:
    """C = O - rho; large where errors of both signs cancel inside the support"""
    return obs(stats) - rho(stats)


__all__ = [
    'DEFAULT_EPS',
    'RelevanceStats',
    'record',
    'rho',
    'obs',
    'criterion'
]

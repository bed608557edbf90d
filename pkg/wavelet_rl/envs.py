"""
Deterministic classic-control tasks with states normalised into [0, 1]^d

Mountain Car and the 4-dimensional Acrobot, both paying -1 per step.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Dict, Tuple, Type

import numpy as np

from .exceptions import ConfigurationError, TerminalStateError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EnvState:
    raw: np.ndarray
    terminal: bool = False


class Environment(ABC):
    """Stepping interface consumed by the agent"""

    name: str = ''
    n_actions: int = 3

    @property
    @abstractmethod
    def low(self) -> np.ndarray:
        ...

    @property
    @abstractmethod
    def high(self) -> np.ndarray:
        ...

    @property
    def state_dim(self) -> int:
        return int(self.low.shape[0])

    @abstractmethod
    def reset(self, rng: np.random.Generator) -> EnvState:
        ...

    @abstractmethod
    def _transition(self, raw: np.ndarray, action: int) -> Tuple[np.ndarray, bool]:
        ...

    def step(self, state: EnvState, action: int) -> Tuple[EnvState, float]:
        """
        Advance one step

        Raises:
            TerminalStateError: if state is already terminal
            ValueError: for an action outside 0..n_actions-1
        """
        if state.terminal:
            raise TerminalStateError(f'{self.name}: cannot step from a terminal state')
        if not 0 <= action < self.n_actions:
            raise ValueError(f'{self.name}: action {action} outside 0..{self.n_actions - 1}')
        raw, terminal = self._transition(state.raw, int(action))
        return EnvState(raw=raw, terminal=terminal), -1.0

    def normalize(self, raw: np.ndarray) -> np.ndarray:
        """Affine map from the native bounds onto [0, 1]^d"""
        low, high = self.low, self.high
        return np.clip((np.asarray(raw, dtype=float) - low) / (high - low), 0.0, 1.0)


class MountainCar(Environment):
    """
    Underpowered car in a valley

    v' = clip(v + 0.001 (a - 1) - 0.0025 cos(3p)), p' = clip(p + v'),
    terminal once p' >= 0.5. Hitting the left wall zeroes the velocity.
    """

    name = 'mountain_car'
    n_actions = 3

    MIN_POSITION = -1.2
    MAX_POSITION = 0.6
    MAX_SPEED = 0.07
    GOAL_POSITION = 0.5
    FORCE = 0.001
    GRAVITY = 0.0025

    _low = np.array([MIN_POSITION, -MAX_SPEED])
    _high = np.array([MAX_POSITION, MAX_SPEED])

    @property
    def low(self) -> np.ndarray:
        return self._low

    @property
    def high(self) -> np.ndarray:
        return self._high

    def reset(self, rng: np.random.Generator) -> EnvState:
        position = rng.uniform(-0.6, -0.4)
        return EnvState(raw=np.array([position, 0.0]))

    def _transition(self, raw: np.ndarray, action: int) -> Tuple[np.ndarray, bool]:
        position, velocity = float(raw[0]), float(raw[1])
        velocity += (action - 1) * self.FORCE - self.GRAVITY * math.cos(3.0 * position)
        velocity = min(max(velocity, -self.MAX_SPEED), self.MAX_SPEED)
        position += velocity
        position = min(max(position, self.MIN_POSITION), self.MAX_POSITION)
        if position == self.MIN_POSITION and velocity < 0.0:
            velocity = 0.0
        return np.array([position, velocity]), position >= self.GOAL_POSITION


def wrap_angle(x: float) -> float:
    """Map an angle into [-pi, pi)"""
    return (x + math.pi) % (2.0 * math.pi) - math.pi


def rk4_step(f: Callable[[np.ndarray], np.ndarray], y: np.ndarray, dt: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def euler_step(f: Callable[[np.ndarray], np.ndarray], y: np.ndarray, dt: float) -> np.ndarray:
    return y + dt * f(y)


INTEGRATORS = {'rk4': rk4_step, 'euler': euler_step}


class Acrobot(Environment):
    """
    Two-link underactuated pendulum, torque in {-1, 0, +1} on the second joint

    State (theta1, theta2, dtheta1, dtheta2); terminal when the tip rises
    above the bar: -cos(theta1) - cos(theta1 + theta2) > 1.
    """

    name = 'acrobot'
    n_actions = 3

    LINK_LENGTH_1 = 1.0
    LINK_MASS_1 = 1.0
    LINK_MASS_2 = 1.0
    LINK_COM_POS_1 = 0.5
    LINK_COM_POS_2 = 0.5
    LINK_MOI = 1.0
    GRAVITY = 9.8
    MAX_VEL_1 = 4.0 * math.pi
    MAX_VEL_2 = 9.0 * math.pi
    AVAIL_TORQUE = (-1.0, 0.0, 1.0)

    def __init__(self, dt: float = 0.2, integrator: str = 'rk4'):
        if dt <= 0:
            raise ConfigurationError(f'acrobot dt must be positive, got {dt}')
        if integrator not in INTEGRATORS:
            raise ConfigurationError(f'unknown integrator {integrator!r}, expected one of {sorted(INTEGRATORS)}')
        self.dt = dt
        self.integrator = integrator
        self._integrate = INTEGRATORS[integrator]
        self._low = np.array([-math.pi, -math.pi, -self.MAX_VEL_1, -self.MAX_VEL_2])
        self._high = np.array([math.pi, math.pi, self.MAX_VEL_1, self.MAX_VEL_2])

    @property
    def low(self) -> np.ndarray:
        return self._low

    @property
    def high(self) -> np.ndarray:
        return self._high

    def reset(self, rng: np.random.Generator) -> EnvState:
        return EnvState(raw=rng.uniform(-0.1, 0.1, size=4))

    def _derivatives(self, y: np.ndarray, torque: float) -> np.ndarray:
        m1, m2 = self.LINK_MASS_1, self.LINK_MASS_2
        l1 = self.LINK_LENGTH_1
        lc1, lc2 = self.LINK_COM_POS_1, self.LINK_COM_POS_2
        i1 = i2 = self.LINK_MOI
        g = self.GRAVITY
        theta1, theta2, dtheta1, dtheta2 = y

        d1 = m1 * lc1 ** 2 + m2 * (l1 ** 2 + lc2 ** 2 + 2 * l1 * lc2 * math.cos(theta2)) + i1 + i2
        d2 = m2 * (lc2 ** 2 + l1 * lc2 * math.cos(theta2)) + i2
        phi2 = m2 * lc2 * g * math.cos(theta1 + theta2 - math.pi / 2.0)
        phi1 = (
            -m2 * l1 * lc2 * dtheta2 ** 2 * math.sin(theta2)
            - 2 * m2 * l1 * lc2 * dtheta2 * dtheta1 * math.sin(theta2)
            + (m1 * lc1 + m2 * l1) * g * math.cos(theta1 - math.pi / 2.0)
            + phi2
        )
        ddtheta2 = (
            torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1 ** 2 * math.sin(theta2) - phi2
        ) / (m2 * lc2 ** 2 + i2 - d2 ** 2 / d1)
        ddtheta1 = -(d2 * ddtheta2 + phi1) / d1
        return np.array([dtheta1, dtheta2, ddtheta1, ddtheta2])

    def _transition(self, raw: np.ndarray, action: int) -> Tuple[np.ndarray, bool]:
        torque = self.AVAIL_TORQUE[action]
        y = self._integrate(lambda v: self._derivatives(v, torque), np.asarray(raw, dtype=float), self.dt)
        y = np.array([
            wrap_angle(y[0]),
            wrap_angle(y[1]),
            min(max(y[2], -self.MAX_VEL_1), self.MAX_VEL_1),
            min(max(y[3], -self.MAX_VEL_2), self.MAX_VEL_2),
        ])
        terminal = -math.cos(y[0]) - math.cos(y[0] + y[1]) > 1.0
        return y, bool(terminal)

    def normalize(self, raw: np.ndarray) -> np.ndarray:
        raw = np.asarray(raw, dtype=float).copy()
        raw[0] = wrap_angle(raw[0])
        raw[1] = wrap_angle(raw[1])
        return super().normalize(raw)


ENVIRONMENTS: Dict[str, Type[Environment]] = {
    MountainCar.name: MountainCar,
    Acrobot.name: Acrobot,
}


def make_env(name: str, **kwargs) -> Environment:
    """Instantiate a registered environment by name"""
    try:
        cls = ENVIRONMENTS[name]
    except KeyError:
        raise ConfigurationError(f'unknown environment {name!r}, expected one of {sorted(ENVIRONMENTS)}') from None
    if cls is MountainCar:
        return cls()
    return cls(**kwargs)


__all__ = [
    'EnvState',
    'Environment',
    'MountainCar',
    'Acrobot',
    'ENVIRONMENTS',
    'INTEGRATORS',
    'wrap_angle',
    'rk4_step',
    'euler_step',
    'make_env'
]

"""
Sarsa(lambda) with linear action values over a (possibly growing) basis
"""

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Sequence, Tuple

import numpy as np

from .adaptive import AdaptiveController
from .basis import BasisSet
from .envs import Environment

if TYPE_CHECKING:
    from models import AgentConfig

logger = logging.getLogger(__name__)

ACCUMULATING = 'accumulating'
REPLACING = 'replacing'

Active = Tuple[np.ndarray, np.ndarray]


@dataclass
class TDSample:
    """One on-policy transition; delta is filled in by sarsa_step"""
    state: Sequence[float]
    action: int
    reward: float
    next_state: Optional[Sequence[float]] = None
    next_action: Optional[int] = None
    terminal: bool = False
    delta: float = math.nan


@dataclass
class EpisodeRecord:
    episode: int
    return_: float
    steps: int
    edits: int
    cumulative_edits: int
    basis_size: int
    terminal: bool


def q_value(basis: BasisSet, s: Sequence[float], a: int) -> float:
    """Sum over active features of weights[a, i] * phi_i(s)"""
    return basis.value(s, a)


def greedy_action(q: np.ndarray, epsilon_greedy: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy choice over precomputed action values"""
    if epsilon_greedy > 0.0 and rng.random() < epsilon_greedy:
        return int(rng.integers(q.shape[0]))
    best = np.flatnonzero(q == q.max())
    if best.size == 0:
        # NaN action values after divergence
        best = np.arange(q.shape[0])
    if best.size == 1:
        return int(best[0])
    return int(rng.choice(best))


def select_action(
    basis: BasisSet,
    s: Sequence[float],
    epsilon_greedy: float,
    rng: np.random.Generator,
) -> int:
    """
    Argmax of Q(s, .) with random tie-breaking, or a uniform action with
    probability epsilon_greedy
    """
    return greedy_action(basis.q_values(s), epsilon_greedy, rng)


def sarsa_step(
    basis: BasisSet,
    sample: TDSample,
    config: 'AgentConfig',
    active: Optional[Active] = None,
    next_active: Optional[Active] = None,
    alpha_scale: Optional[np.ndarray] = None,
) -> float:
    """
    Apply one Sarsa(lambda) update in place

    The taken action's traces are bumped by phi(s), all weights move by
    alpha * delta * trace, then every trace decays by gamma * lambda.

    Args:
        basis: Basis holding weights and traces
        sample: Transition; its delta field is set
        config: Agent hyperparameters
        active: Precomputed sparse features of sample.state
        next_active: Precomputed sparse features of sample.next_state
        alpha_scale: Per-feature learning-rate factors

    Returns:
        The TD error
    """
    positions, values = active if active is not None else basis.active(sample.state)
    q_sa = float(basis.weights[sample.action, positions].dot(values))
    if sample.terminal:
        q_next = 0.0
    else:
        next_pos, next_vals = next_active if next_active is not None else basis.active(sample.next_state)
        q_next = float(basis.weights[sample.next_action, next_pos].dot(next_vals))
    delta = sample.reward + config.gamma * q_next - q_sa
    sample.delta = delta

    if config.trace_type == REPLACING:
        basis.traces[sample.action, positions] = values
    else:
        basis.traces[sample.action, positions] += values

    step = config.alpha * delta
    if alpha_scale is not None:
        basis.weights += (step * alpha_scale) * basis.traces
    else:
        basis.weights += step * basis.traces
    basis.traces *= config.gamma * config.lambda_
    return delta


class SarsaLambdaAgent:
    """
    Sarsa(lambda) learner owning one basis, one RNG and an optional controller

    The RNG drives tie-breaking, exploration and environment resets, so a
    run is reproducible from (seed, config).
    """

    def __init__(
        self,
        basis: BasisSet,
        config: 'AgentConfig',
        controller: Optional[AdaptiveController] = None,
        rng: Optional[np.random.Generator] = None,
    ):
        self.basis = basis
        self.config = config
        self.controller = controller
        self.rng = rng if rng is not None else np.random.default_rng(config.seed)
        self.total_steps = 0
        self.total_edits = 0
        self.episodes = 0
        self._refresh_alpha_scale()

    def _refresh_alpha_scale(self):
        scale = self.basis.feature_alpha_scale(self.config.fourier_alpha_scaling)
        self._alpha_scale = None if np.all(scale == 1.0) else scale

    def run_episode(self, env: Environment, max_steps: int, learn: bool = True) -> EpisodeRecord:
        return run_episode(env, self, max_steps, learn=learn)


def run_episode(
    env: Environment,
    agent: SarsaLambdaAgent,
    max_steps: int,
    learn: bool = True,
) -> EpisodeRecord:
    """
    Play one episode, learning online unless learn is False

    The adaptive controller sees every TD error and may edit the basis
    between steps; features of the next state are recomputed after an edit.

    Args:
        env: Environment to interact with
        agent: Learner holding basis, config, controller and RNG
        max_steps: Step cap for the episode
        learn: Update weights and run structural checks

    Returns:
        Episode summary
    """
    basis, config, rng = agent.basis, agent.config, agent.rng
    controller = agent.controller if learn else None
    epsilon = config.epsilon_greedy if learn else 0.0

    basis.reset_traces()
    state = env.reset(rng)
    s = env.normalize(state.raw)
    active = basis.active(s)
    action = greedy_action(basis.weights[:, active[0]].dot(active[1]), epsilon, rng)

    total_return = 0.0
    steps = 0
    edits = 0
    terminal = False
    while steps < max_steps:
        state, reward = env.step(state, action)
        steps += 1
        total_return += reward
        terminal = state.terminal

        if terminal:
            next_s, next_active, next_action = None, None, None
        else:
            next_s = env.normalize(state.raw)
            next_active = basis.active(next_s)
            next_q = basis.weights[:, next_active[0]].dot(next_active[1])
            next_action = greedy_action(next_q, epsilon, rng)

        if learn:
            sample = TDSample(s, action, reward, next_s, next_action, terminal)
            delta = sarsa_step(basis, sample, config, active, next_active, agent._alpha_scale)
            agent.total_steps += 1
            if controller is not None:
                controller.observe(active[0], active[1], delta)
                edit = controller.step(agent.total_steps)
                if edit is not None:
                    edits += 1
                    edit.episode = agent.episodes
                    agent._refresh_alpha_scale()
                    logger.info(
                        f'Episode {agent.episodes} step {steps}: {edit.kind} '
                        f'{edit.source_ids} -> {edit.new_ids} (score {edit.score:.6g}, size {edit.size_after})'
                    )
                    if not terminal:
                        next_active = basis.active(next_s)

        if terminal:
            break
        s, active, action = next_s, next_active, next_action

    agent.total_edits += edits
    record = EpisodeRecord(
        episode=agent.episodes,
        return_=total_return,
        steps=steps,
        edits=edits,
        cumulative_edits=agent.total_edits,
        basis_size=len(basis),
        terminal=terminal,
    )
    agent.episodes += 1
    return record


__all__ = [
    'ACCUMULATING',
    'REPLACING',
    'TDSample',
    'EpisodeRecord',
    'q_value',
    'greedy_action',
    'select_action',
    'sarsa_step',
    'SarsaLambdaAgent',
    'run_episode'
]

"""Tabular Q-learning over the parameter assignments of one operator chain.

States are discretized feature vectors comparing the latest result with the
ground truth (see :func:`opchain.metrics.discretize_state`); actions are
indices into the chain's :class:`~opchain.chains.ActionTable`.  Each step
applies a full action to the original image, so the environment only moves
through the feature bins of the result it produced.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .chains import ActionSpec, ActionTable, ChainSpec
from .errors import ContractError, InvalidParameterError
from .evaluation import ChainEvaluator, DatasetEntry
from .metrics import DEFAULT_TOL, DEFAULT_WEIGHTS, N_STATES, START_STATE, discretize_state


class Policy(str, enum.Enum):
    GREEDY = "greedy"
    EPSILON_GREEDY = "epsilon_greedy"
    BOLTZMANN = "boltzmann"


@dataclass(frozen=True)
class LearnParams:
    alpha: float = 0.1
    # Every step restarts from the raw image, so the next state says little
    # about future reward; bootstrapping only adds noise to the ranking.
    gamma: float = 0.0
    epsilon: float = 0.1
    temperature: float = 0.1
    policy: Policy = Policy.EPSILON_GREEDY
    episodes: int = 200
    max_steps: int = 20
    target_reward: float = 0.95
    seed: int = 0
    # candidates re-measured on the whole dataset after learning; None = all
    final_k: int | None = 5

    def __post_init__(self):
        object.__setattr__(self, "policy", Policy(self.policy))
        checks = [
            (0 <= self.alpha <= 1, "alpha must be in [0, 1]"),
            (0 <= self.gamma <= 1, "gamma must be in [0, 1]"),
            (0 <= self.epsilon <= 1, "epsilon must be in [0, 1]"),
            (self.temperature > 0, "temperature must be > 0"),
            (self.episodes >= 0, "episodes must be >= 0"),
            (self.max_steps >= 1, "max_steps must be >= 1"),
            (0 <= self.target_reward <= 1, "target_reward must be in [0, 1]"),
            (self.final_k is None or self.final_k >= 1, "final_k must be >= 1 or None"),
        ]
        for ok, msg in checks:
            if not ok:
                raise InvalidParameterError(f"{msg} ({self})")

    def with_(self, **changes) -> "LearnParams":
        return replace(self, **changes)


class QTable:
    """Dense Q(s, a) table, zero-initialized, with per-cell update counts."""

    def __init__(self, action_count: int, state_count: int = N_STATES):
        if action_count < 1:
            raise ContractError("a Q-table needs at least one action")
        self.values = np.zeros((state_count, action_count))
        self.visits = np.zeros((state_count, action_count), dtype=np.int64)

    @property
    def action_count(self) -> int:
        return self.values.shape[1]

    @property
    def state_count(self) -> int:
        return self.values.shape[0]

    def _check(self, s: int, a: int | None = None):
        if not 0 <= s < self.state_count:
            raise ContractError(f"state {s} out of range [0, {self.state_count - 1}]")
        if a is not None and not 0 <= a < self.action_count:
            raise ContractError(f"action {a} out of range [0, {self.action_count - 1}]")


def q_update(q: QTable, s: int, a: int, r: float, s_next: int, params: LearnParams) -> float:
    """One-step Q-learning update of cell (s, a), in place; returns the new value.

    Q(s,a) <- Q(s,a) + alpha * (r + gamma * max_b Q(s_next, b) - Q(s,a))
    """
    q._check(s, a)
    q._check(s_next)
    old = q.values[s, a]
    target = r + params.gamma * q.values[s_next].max()
    q.values[s, a] = old + params.alpha * (target - old)
    q.visits[s, a] += 1
    return q.values[s, a]


def greedy(row: np.ndarray) -> int:
    return int(np.argmax(row))     # first maximum wins ties


def select_action(q: QTable, s: int, params: LearnParams, rng: np.random.Generator) -> int:
    q._check(s)
    row = q.values[s]
    if params.policy is Policy.GREEDY:
        return greedy(row)
    if params.policy is Policy.EPSILON_GREEDY:
        if rng.random() < params.epsilon:
            return int(rng.integers(q.action_count))
        return greedy(row)
    z = (row - row.max()) / params.temperature
    p = np.exp(z)
    cdf = np.cumsum(p / p.sum())
    i = int(np.searchsorted(cdf, rng.random(), side="right"))
    return min(i, q.action_count - 1)


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """PCG64 stream derived from ``seed`` and an optional spawn key."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


@dataclass(frozen=True)
class EpisodeRecord:
    image_id: str
    steps: int
    final_reward: float
    actions: tuple[int, ...] = ()


def run_episode(evaluator: ChainEvaluator, image_index: int, q: QTable,
                params: LearnParams, rng: np.random.Generator) -> EpisodeRecord:
    """Run one episode on one image, updating ``q`` in place."""
    s = START_STATE
    taken = []
    reward = 0.0
    for _ in range(params.max_steps):
        a = select_action(q, s, params, rng)
        report = evaluator.report(image_index, a)
        s_next = discretize_state(report.features)
        q_update(q, s, a, report.reward, s_next, params)
        taken.append(a)
        reward = report.reward
        s = s_next
        if reward >= params.target_reward:
            break
    return EpisodeRecord(evaluator.dataset[image_index].id, len(taken), reward, tuple(taken))


@dataclass
class TuneResult:
    chain: ChainSpec
    best_action: ActionSpec
    best_action_index: int
    best_quality: float
    q_table: QTable | None
    episode_log: list[EpisodeRecord] = field(default_factory=list)
    # mean reward of every action measured in the final sweep
    candidate_qualities: dict[int, float] = field(default_factory=dict)
    action_count: int = 0


def corrected_values(q: QTable, alpha: float) -> np.ndarray:
    """Q with the zero-initialization shrinkage removed.

    From Q = 0, n updates toward a fixed target t leave Q = (1 - (1 - alpha)**n) * t,
    so raw values rank frequently updated cells above better but rarer ones.
    Dividing by that factor recovers the running estimate of the target.
    Cells never updated are -inf.
    """
    if alpha <= 0:
        return np.where(q.visits > 0, q.values, -np.inf)
    shrink = 1.0 - (1.0 - alpha) ** q.visits
    return np.divide(q.values, shrink, out=np.full(q.values.shape, -np.inf), where=q.visits > 0)


def top_candidates(q: QTable, k: int | None, alpha: float = 0.1) -> list[int]:
    """Indices of the k actions with the largest max-over-states corrected Q.

    Ties, including the all-unvisited case, go to the lowest index.
    """
    best = corrected_values(q, alpha).max(axis=0)
    order = np.argsort(-best, kind="stable")
    return [int(i) for i in order[:k]]


def final_sweep(evaluator: ChainEvaluator, candidates: Sequence[int]) -> tuple[int, float, dict[int, float]]:
    """Measure each candidate's mean reward; highest wins, lowest index on ties."""
    qualities = {a: evaluator.mean_reward(a) for a in candidates}
    best = min(qualities, key=lambda a: (-qualities[a], a))
    return best, qualities[best], qualities


def tune_chain(dataset: Sequence[DatasetEntry], chain: ChainSpec, actions: ActionTable | None = None,
               params: LearnParams = LearnParams(), weights=DEFAULT_WEIGHTS, tol: float = DEFAULT_TOL,
               evaluator: ChainEvaluator | None = None, rng: np.random.Generator | None = None) -> TuneResult:
    """Learn a Q-table for ``chain`` and return its best measured action.

    Episodes cycle through the dataset round-robin.  Afterwards the top
    ``params.final_k`` actions by (shrinkage-corrected) max Q are
    re-evaluated on every image and the one with the highest mean reward is
    returned.
    """
    if len(dataset) == 0:
        raise InvalidParameterError("dataset is empty")
    if evaluator is None:
        evaluator = ChainEvaluator(chain, dataset, weights, tol, actions)
    actions = evaluator.actions
    if rng is None:
        rng = make_rng(params.seed, chain.chain_id)
    q = QTable(len(actions))
    log = []
    for episode in range(params.episodes):
        log.append(run_episode(evaluator, episode % len(dataset), q, params, rng))
    best, quality, qualities = final_sweep(evaluator, top_candidates(q, params.final_k, params.alpha))
    return TuneResult(chain, actions[best], best, quality, q, log, qualities, len(actions))

"""Chain enumeration, per-chain tuning and selection of the best chain.

:func:`search` tunes every chain with Q-learning; :func:`exhaustive_search`
evaluates every (chain, action, image) triple and serves as the reference
the learner is checked against.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .chains import ActionTable, ChainSpec, OperatorSpec
from .errors import BudgetExceededError, InvalidParameterError
from .evaluation import ChainEvaluator, DatasetEntry
from .metrics import DEFAULT_TOL, DEFAULT_WEIGHTS, check_weights
from .qlearn import LearnParams, TuneResult, final_sweep, make_rng, tune_chain

DEFAULT_BUDGET = 1_000_000


@dataclass(frozen=True)
class PhaseDef:
    name: str
    operators: tuple[OperatorSpec, ...]

    def __post_init__(self):
        if not self.operators:
            raise InvalidParameterError(f"phase {self.name!r} has no operators")


def enumerate_chains(phases: Sequence[PhaseDef]) -> list[ChainSpec]:
    """Cartesian product of the phases' operator lists, in phase order."""
    if not phases:
        raise InvalidParameterError("at least one phase is required")
    for phase in phases:
        if not phase.operators:
            raise InvalidParameterError(f"phase {phase.name!r} has no operators")
    combos = itertools.product(*(p.operators for p in phases))
    return [ChainSpec(i, tuple(ops)) for i, ops in enumerate(combos)]


def enumerate_actions(chain: ChainSpec) -> ActionTable:
    return ActionTable(chain)


@dataclass(frozen=True)
class Winner:
    chain: ChainSpec
    action_index: int
    quality: float

    @property
    def action(self):
        return ActionTable(self.chain)[self.action_index]


@dataclass
class SearchResult:
    method: str                     # "qlearning" or "exhaustive"
    chains: list[TuneResult]
    winner: Winner
    evaluations: int = 0
    ties: list[int] = field(default_factory=list)   # chain ids tied with the winner


class EvaluatorPool:
    """One :class:`ChainEvaluator` per chain over a fixed dataset.

    Reusing a pool across searches on the same inputs shares cached results.
    """

    def __init__(self, dataset: Sequence[DatasetEntry], weights=DEFAULT_WEIGHTS, tol: float = DEFAULT_TOL):
        self.dataset = list(dataset)
        self.weights = check_weights(weights)
        self.tol = float(tol)
        self._evaluators: dict[ChainSpec, ChainEvaluator] = {}

    def get(self, chain: ChainSpec) -> ChainEvaluator:
        ev = self._evaluators.get(chain)
        if ev is None:
            ev = ChainEvaluator(chain, self.dataset, self.weights, self.tol)
            self._evaluators[chain] = ev
        return ev

    @property
    def evaluations(self) -> int:
        return sum(ev.evaluations for ev in self._evaluators.values())


def pick_winner(results: list[TuneResult]) -> tuple[Winner, list[int]]:
    best = max(r.best_quality for r in results)
    tied = [r.chain.chain_id for r in results if r.best_quality == best]
    top = min((r for r in results if r.best_quality == best), key=lambda r: r.chain.chain_id)
    return Winner(top.chain, top.best_action_index, top.best_quality), tied


def _prepare(dataset, phases, weights, tol, pool):
    if len(dataset) == 0:
        raise InvalidParameterError("dataset is empty")
    chains = enumerate_chains(phases)
    if pool is None:
        pool = EvaluatorPool(dataset, weights, tol)
    return chains, pool


def search(dataset: Sequence[DatasetEntry], phases: Sequence[PhaseDef], params: LearnParams = LearnParams(),
           weights=DEFAULT_WEIGHTS, tol: float = DEFAULT_TOL, workers: int = 1,
           pool: EvaluatorPool | None = None) -> SearchResult:
    """Tune every chain with Q-learning and return the best (chain, action).

    Each chain gets its own RNG stream keyed by chain id, so results do not
    depend on ``workers`` or completion order.
    """
    chains, pool = _prepare(dataset, phases, weights, tol, pool)
    before = pool.evaluations

    def run(chain: ChainSpec) -> TuneResult:
        return tune_chain(pool.dataset, chain, params=params, evaluator=pool.get(chain),
                          rng=make_rng(params.seed, chain.chain_id))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(run, chains))
    else:
        results = [run(c) for c in chains]
    winner, ties = pick_winner(results)
    return SearchResult("qlearning", results, winner, pool.evaluations - before, ties)


def exhaustive_cost(dataset: Sequence[DatasetEntry], phases: Sequence[PhaseDef]) -> int:
    return sum(len(ActionTable(c)) for c in enumerate_chains(phases)) * len(dataset)


def exhaustive_search(dataset: Sequence[DatasetEntry], phases: Sequence[PhaseDef], weights=DEFAULT_WEIGHTS,
                      tol: float = DEFAULT_TOL, budget: int = DEFAULT_BUDGET,
                      pool: EvaluatorPool | None = None) -> SearchResult:
    """Evaluate every (chain, action, image) triple; fully deterministic."""
    chains, pool = _prepare(dataset, phases, weights, tol, pool)
    cost = exhaustive_cost(dataset, phases)
    if cost > budget:
        sizes = " + ".join(str(len(ActionTable(c))) for c in chains)
        raise BudgetExceededError(
            f"exhaustive search needs ({sizes}) actions x {len(dataset)} images = "
            f"{cost} evaluations, budget is {budget}")
    before = pool.evaluations
    results = []
    for chain in chains:
        ev = pool.get(chain)
        best, quality, qualities = final_sweep(ev, range(len(ev.actions)))
        results.append(TuneResult(chain, ev.actions[best], best, quality, None, [],
                                  qualities, len(ev.actions)))
    winner, ties = pick_winner(results)
    return SearchResult("exhaustive", results, winner, pool.evaluations - before, ties)

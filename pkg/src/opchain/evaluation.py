"""Memoized (image, chain, action) -> EvalReport evaluation.

All operators are pure, so stage outputs can be cached by the parameter
prefix that produced them: a chain whose first operator has 2 settings and
whose second has 36 only computes 2 filtered images and 72 edge maps per
image, however many post-processing settings follow.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .chains import ActionTable, ChainSpec
from .imaging import apply_operator, check_chain
from .metrics import DEFAULT_TOL, DEFAULT_WEIGHTS, EvalReport, GroundTruth, check_weights, evaluate


@dataclass(frozen=True, eq=False)
class DatasetEntry:
    id: str
    image: np.ndarray
    gt: GroundTruth


class ChainEvaluator:
    """Evaluates actions of one chain on a fixed dataset, caching every stage."""

    def __init__(self, chain: ChainSpec, dataset: Sequence[DatasetEntry],
                 weights=DEFAULT_WEIGHTS, tol: float = DEFAULT_TOL,
                 actions: ActionTable | None = None):
        self.chain = chain
        self.dataset = list(dataset)
        self.weights = check_weights(weights)
        self.tol = float(tol)
        self.actions = actions if actions is not None else ActionTable(chain)
        check_chain(chain)
        self._stages: dict[tuple, np.ndarray] = {}
        self._reports: dict[tuple[int, int], EvalReport] = {}
        self.evaluations = 0    # distinct (image, action) pairs evaluated

    def result(self, image_index: int, action_index: int) -> np.ndarray:
        action = self.actions[action_index]
        current = self.dataset[image_index].image
        key: tuple = (image_index,)
        for op, values in zip(self.chain.operators, action.values):
            key = key + (values,)
            cached = self._stages.get(key)
            if cached is None:
                cached = apply_operator(op.op_id, current, values)
                self._stages[key] = cached
            current = cached
        return current

    def report(self, image_index: int, action_index: int) -> EvalReport:
        key = (image_index, action_index)
        rep = self._reports.get(key)
        if rep is None:
            result = self.result(image_index, action_index)
            rep = evaluate(result, self.dataset[image_index].gt, self.weights, self.tol)
            self._reports[key] = rep
            self.evaluations += 1
        return rep

    def mean_reward(self, action_index: int) -> float:
        return float(np.mean([self.report(i, action_index).reward
                              for i in range(len(self.dataset))]))

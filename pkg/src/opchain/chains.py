"""Operator chains and the parameter-value assignments ("actions") over them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterator, Sequence

from .errors import ContractError, InvalidParameterError


@dataclass(frozen=True)
class OperatorSpec:
    """One operator with a finite, ordered value domain per parameter."""

    op_id: str
    params: tuple[tuple[str, tuple[Any, ...]], ...] = ()

    def __post_init__(self):
        for name, domain in self.params:
            if len(domain) == 0:
                raise InvalidParameterError(f"{self.op_id}.{name}: empty domain")

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.params)

    @property
    def domains(self) -> tuple[tuple[Any, ...], ...]:
        return tuple(domain for _, domain in self.params)


@dataclass(frozen=True)
class ChainSpec:
    """An ordered combination of operators, one per phase."""

    chain_id: int
    operators: tuple[OperatorSpec, ...]

    @property
    def name(self) -> str:
        return "+".join(op.op_id for op in self.operators)

    def flat_params(self) -> list[tuple[str, tuple[Any, ...]]]:
        """All ``(op.param, domain)`` pairs in chain order."""
        return [(f"{op.op_id}.{name}", domain)
                for op in self.operators for name, domain in op.params]


@dataclass(frozen=True)
class ActionSpec:
    """A concrete value for every parameter of every operator in a chain.

    ``values[j]`` holds the values for the j-th operator, in that operator's
    parameter order, e.g. ``((3,), ("prewitt", 0.02), (5, 8))``.
    """

    values: tuple[tuple[Any, ...], ...]

    def named(self, chain: ChainSpec) -> dict[str, Any]:
        check_arity(chain, self)
        out = {}
        for op, vals in zip(chain.operators, self.values):
            for name, v in zip(op.param_names, vals):
                out[f"{op.op_id}.{name}"] = v
        return out


def check_arity(chain: ChainSpec, action: ActionSpec) -> None:
    if len(action.values) != len(chain.operators):
        raise ContractError(
            f"action has {len(action.values)} operator groups, chain "
            f"{chain.name} has {len(chain.operators)} operators")
    for op, vals in zip(chain.operators, action.values):
        if len(vals) != len(op.params):
            raise ContractError(
                f"{op.op_id} expects {len(op.params)} values, got {len(vals)}")


class ActionTable(Sequence):
    """All actions of a chain in lexicographic domain order.

    Index ``i`` is decoded as a mixed-radix number whose most significant
    digit is the first parameter of the first operator, so the ordering is
    the one ``itertools.product`` over the flat domains would produce.
    Actions are decoded on demand; nothing is materialized.
    """

    def __init__(self, chain: ChainSpec):
        self.chain = chain
        self._domains = [d for _, d in chain.flat_params()]
        self._sizes = [len(d) for d in self._domains]
        self._len = math.prod(self._sizes)

    def __len__(self) -> int:
        return self._len

    def digits(self, index: int) -> list[int]:
        if not 0 <= index < self._len:
            raise ContractError(
                f"action index {index} out of range [0, {self._len - 1}] "
                f"for chain {self.chain.name}")
        out = []
        for size in reversed(self._sizes):
            index, d = divmod(index, size)
            out.append(d)
        return out[::-1]

    def __getitem__(self, index):
        if isinstance(index, slice):
            return [self[i] for i in range(*index.indices(self._len))]
        if index < 0:
            index += self._len
        flat = [dom[d] for dom, d in zip(self._domains, self.digits(index))]
        values, pos = [], 0
        for op in self.chain.operators:
            n = len(op.params)
            values.append(tuple(flat[pos:pos + n]))
            pos += n
        return ActionSpec(tuple(values))

    def __iter__(self) -> Iterator[ActionSpec]:
        for i in range(self._len):
            yield self[i]

    def encode(self, action: ActionSpec) -> int:
        """Inverse of indexing: the table index of ``action``."""
        check_arity(self.chain, action)
        flat = [v for vals in action.values for v in vals]
        index = 0
        for (name, dom), v in zip(self.chain.flat_params(), flat):
            try:
                d = dom.index(v)
            except ValueError:
                raise ContractError(f"{name}={v!r} not in domain {dom}") from None
            index = index * len(dom) + d
        return index

    def index(self, action, start=0, stop=None) -> int:
        return self.encode(action)

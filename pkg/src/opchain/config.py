"""Problem configuration: phases, operators, parameter domains and learning settings.

The file format is flat ``key = value`` text.  ``#`` starts a comment, list
values are comma separated and fractions such as ``1/3`` are accepted
wherever a number is expected::

    phases = preprocessing, processing, postprocessing
    phase.preprocessing = medfilt2, ordfilt2, wiener2
    phase.processing = edge
    phase.postprocessing = bwareaopen

    medfilt2.size = 3, 5
    edge.method = sobel, prewitt, zerocross, log
    edge.threshold = 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10
    bwareaopen.min_size = 10, 30, 50
    bwareaopen.connectivity = 4, 8

    weights = 1/3, 1/3, 1/3
    tol = 2
    learn.alpha = 0.1
    learn.policy = epsilon_greedy
    dataset = data/
    output = out/

Every operator named in a phase needs a domain line for each of its
parameters.  ``learn.*`` keys map onto :class:`~opchain.qlearn.LearnParams`
fields; ``learn.final_k = all`` re-measures every action after learning.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .chains import OperatorSpec
from .errors import ContractError, InvalidParameterError
from .imaging import OPERATORS, Connectivity, EdgeMethod, check_chain
from .metrics import DEFAULT_TOL, DEFAULT_WEIGHTS, check_weights
from .orchestration import DEFAULT_BUDGET, PhaseDef, enumerate_chains
from .qlearn import LearnParams, Policy

DEFAULT_CONFIG_TEXT = """\
# Three processing phases, executed in this order.
phases = preprocessing, processing, postprocessing
phase.preprocessing = medfilt2, ordfilt2, wiener2
phase.processing = edge
phase.postprocessing = bwareaopen

medfilt2.size = 3, 5
ordfilt2.size = 3, 5
wiener2.size = 3, 5
edge.method = sobel, prewitt, zerocross, log
edge.threshold = 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10
bwareaopen.min_size = 10, 30, 50
bwareaopen.connectivity = 4, 8

# return = 1 - (w1 * over-detection + w2 * under-detection + w3 * localization)
weights = 1/3, 1/3, 1/3
tol = 2
budget = 1000000

learn.alpha = 0.1
learn.gamma = 0.0
learn.epsilon = 0.1
learn.temperature = 0.1
learn.policy = epsilon_greedy
learn.episodes = 200
learn.max_steps = 20
learn.target_reward = 0.95
learn.seed = 0
learn.final_k = 5
"""


@dataclass
class ProblemConfig:
    phases: list[PhaseDef]
    weights: tuple[float, float, float] = DEFAULT_WEIGHTS
    tol: float = DEFAULT_TOL
    learn: LearnParams = field(default_factory=LearnParams)
    dataset_path: Path | None = None
    output_path: Path | None = None
    budget: int = DEFAULT_BUDGET

    def to_dict(self) -> dict:
        """JSON-ready echo of the configuration."""
        learn = dataclasses.asdict(self.learn)
        learn["policy"] = self.learn.policy.value
        return {
            "phases": [{"name": p.name,
                        "operators": [{"id": op.op_id, "params": {n: list(d) for n, d in op.params}}
                                      for op in p.operators]}
                       for p in self.phases],
            "weights": list(self.weights),
            "tol": self.tol,
            "budget": self.budget,
            "learn": learn,
            "dataset": str(self.dataset_path) if self.dataset_path else None,
        }


def _number(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise InvalidParameterError(f"not a number: {text!r}") from None


def _list(text: str) -> list[str]:
    items = [t.strip() for t in text.split(",")]
    if not items or any(t == "" for t in items):
        raise InvalidParameterError(f"malformed list: {text!r}")
    return items


def _check_value(op_id: str, name: str, v):
    key = f"{op_id}.{name}"
    if name == "size":
        v = _number(v)
        if not isinstance(v, int) or v < 3 or v % 2 == 0:
            raise InvalidParameterError(f"{key}: window size must be an odd integer >= 3, got {v}")
    elif name == "method":
        try:
            v = EdgeMethod(v.lower()).value
        except ValueError:
            raise InvalidParameterError(
                f"{key}: unknown edge method {v!r}; choose from {[m.value for m in EdgeMethod]}") from None
    elif name == "threshold":
        v = float(_number(v))
        if v < 0:
            raise InvalidParameterError(f"{key}: threshold must be >= 0, got {v}")
    elif name == "min_size":
        v = _number(v)
        if not isinstance(v, int) or v < 0:
            raise InvalidParameterError(f"{key}: min_size must be a non-negative integer, got {v}")
    elif name == "connectivity":
        v = _number(v)
        if v not in (4, 8):
            raise InvalidParameterError(f"{key}: connectivity must be 4 or 8, got {v}")
        v = int(Connectivity(v))
    return v


_LEARN_TYPES = {f.name: f.type for f in dataclasses.fields(LearnParams)}


def _learn_value(name: str, text: str):
    if name not in _LEARN_TYPES:
        raise InvalidParameterError(f"unknown key learn.{name}")
    if name == "policy":
        try:
            return Policy(text.lower())
        except ValueError:
            raise InvalidParameterError(
                f"learn.policy: choose from {[p.value for p in Policy]}, got {text!r}") from None
    if name == "final_k" and text.lower() in ("all", "none"):
        return None
    v = _number(text)
    if name in ("episodes", "max_steps", "seed", "final_k"):
        if not isinstance(v, int):
            raise InvalidParameterError(f"learn.{name} must be an integer, got {text!r}")
        return v
    return float(v)


def parse_config(text: str, base_dir: Path | None = None) -> ProblemConfig:
    """Parse and validate configuration text."""
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameterError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in entries:
            raise InvalidParameterError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value

    used = set()

    def take(key):
        used.add(key)
        return entries[key]

    if "phases" not in entries:
        raise InvalidParameterError("missing key 'phases'")
    phases = []
    for pname in _list(take("phases")):
        pkey = f"phase.{pname}"
        if pkey not in entries:
            raise InvalidParameterError(f"missing key {pkey!r}")
        ops = []
        for op_id in _list(take(pkey)):
            if op_id not in OPERATORS:
                raise InvalidParameterError(f"{pkey}: unknown operator {op_id!r}; known: {sorted(OPERATORS)}")
            params = []
            for name in OPERATORS[op_id][2]:
                dkey = f"{op_id}.{name}"
                if dkey not in entries:
                    raise InvalidParameterError(f"missing domain {dkey!r} for operator {op_id}")
                domain = tuple(_check_value(op_id, name, v) for v in _list(take(dkey)))
                if len(set(domain)) != len(domain):
                    raise InvalidParameterError(f"{dkey}: duplicate values in {domain}")
                params.append((name, domain))
            ops.append(OperatorSpec(op_id, tuple(params)))
        phases.append(PhaseDef(pname, tuple(ops)))

    for chain in enumerate_chains(phases):
        try:
            check_chain(chain)
        except ContractError as e:
            raise InvalidParameterError(f"phase order: {e}") from None

    cfg = ProblemConfig(phases)
    if "weights" in entries:
        cfg.weights = check_weights([_number(v) for v in _list(take("weights"))])
    if "tol" in entries:
        cfg.tol = float(_number(take("tol")))
        if cfg.tol < 0:
            raise InvalidParameterError("tol must be >= 0")
    if "budget" in entries:
        cfg.budget = _number(take("budget"))
        if not isinstance(cfg.budget, int) or cfg.budget < 1:
            raise InvalidParameterError("budget must be a positive integer")
    learn = {k[6:]: _learn_value(k[6:], take(k)) for k in list(entries) if k.startswith("learn.")}
    cfg.learn = LearnParams(**learn)
    for key, attr in (("dataset", "dataset_path"), ("output", "output_path")):
        if key in entries:
            p = Path(take(key))
            if base_dir is not None and not p.is_absolute():
                p = base_dir / p
            setattr(cfg, attr, p)

    # domains of operators not used by any phase are allowed to stay
    spare = {f"{op}.{n}" for op, spec in OPERATORS.items() for n in spec[2]}
    unknown = sorted(set(entries) - used - spare)
    if unknown:
        raise InvalidParameterError(f"unknown or unused keys: {', '.join(unknown)}")
    return cfg


def load_config(path) -> ProblemConfig:
    path = Path(path)
    try:
        return parse_config(path.read_text(), base_dir=path.parent)
    except InvalidParameterError as e:
        raise InvalidParameterError(f"{path}: {e}") from None


def default_config() -> ProblemConfig:
    return parse_config(DEFAULT_CONFIG_TEXT)

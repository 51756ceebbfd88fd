"""Command-line driver.

    opchain generate   --out DIR [--count N --size PX --noise SIGMA --shapes K]
    opchain search     --data DIR --out DIR [--config FILE] [--seed N] [--workers N]
    opchain exhaustive --data DIR --out DIR [--config FILE]
    opchain tune       --chain ID --data DIR --out DIR [--config FILE] [--seed N]
    opchain evaluate   --chain ID --action INDEX --data DIR --out DIR [--config FILE]

Without ``--config`` the built-in default configuration is used.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .chains import ActionTable
from .config import ProblemConfig, default_config, load_config
from .dataset import generate_synthetic_dataset, load_dataset
from .errors import BudgetExceededError, ContractError, DatasetError, InvalidParameterError
from .imaging import apply_chain
from .metrics import evaluate
from .orchestration import SearchResult, pick_winner, enumerate_chains, exhaustive_search, search
from .pgm import write_pgm
from .qlearn import make_rng, tune_chain
from .report import _jsonable, emit_report


def _common(p: argparse.ArgumentParser, data=True):
    p.add_argument("--config", type=Path, help="problem configuration file (default: built-in)")
    p.add_argument("--seed", type=int, help="random seed (overrides learn.seed)")
    p.add_argument("--out", type=Path, help="output directory")
    if data:
        p.add_argument("--data", type=Path, help="dataset directory (overrides the config's 'dataset')")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opchain", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic image / ground-truth dataset")
    _common(g, data=False)
    g.add_argument("--count", type=int, default=10)
    g.add_argument("--size", type=int, default=64)
    g.add_argument("--noise", type=float, default=0.05, help="Gaussian noise sigma")
    g.add_argument("--shapes", type=int, default=2, help="shapes per image (1-3)")

    s = sub.add_parser("search", help="Q-learning over every operator chain")
    _common(s)
    s.add_argument("--workers", type=int, default=1)

    e = sub.add_parser("exhaustive", help="evaluate every chain, action and image")
    _common(e)

    t = sub.add_parser("tune", help="Q-learning for a single chain")
    _common(t)
    t.add_argument("--chain", type=int, required=True)

    v = sub.add_parser("evaluate", help="apply one chain/action to every image")
    _common(v)
    v.add_argument("--chain", type=int, required=True)
    v.add_argument("--action", type=int, required=True)
    return parser


def _config(args) -> ProblemConfig:
    cfg = load_config(args.config) if args.config else default_config()
    if args.seed is not None:
        cfg.learn = cfg.learn.with_(seed=args.seed)
    if getattr(args, "data", None) is not None:
        cfg.dataset_path = args.data
    if args.out is not None:
        cfg.output_path = args.out
    if cfg.output_path is None:
        raise InvalidParameterError("no output directory: pass --out or set 'output' in the config")
    return cfg


def _dataset(cfg: ProblemConfig):
    if cfg.dataset_path is None:
        raise InvalidParameterError("no dataset: pass --data or set 'dataset' in the config")
    return load_dataset(cfg.dataset_path)


def _chain(cfg: ProblemConfig, chain_id: int):
    chains = enumerate_chains(cfg.phases)
    if not 0 <= chain_id < len(chains):
        raise ContractError(f"chain id {chain_id} out of range [0, {len(chains) - 1}]")
    return chains[chain_id]


def cmd_generate(args) -> None:
    if args.out is None:
        raise InvalidParameterError("generate needs --out")
    seed = 0 if args.seed is None else args.seed
    ids = generate_synthetic_dataset(args.out, args.count, args.size, args.noise, seed, args.shapes)
    print(f"wrote {len(ids)} image/ground-truth pairs to {args.out}")


def _finish(result: SearchResult, cfg: ProblemConfig, dataset) -> None:
    emit_report(result, cfg.output_path, dataset, cfg.to_dict(), cfg.learn.seed)
    w = result.winner
    print(f"winner: chain {w.chain.chain_id} ({w.chain.name}) action {w.action_index} "
          f"{w.action.named(w.chain)} quality {w.quality:.4f}")
    print(f"report written to {cfg.output_path}")


def cmd_search(args) -> None:
    cfg = _config(args)
    dataset = _dataset(cfg)
    result = search(dataset, cfg.phases, cfg.learn, cfg.weights, cfg.tol, workers=args.workers)
    _finish(result, cfg, dataset)


def cmd_exhaustive(args) -> None:
    cfg = _config(args)
    dataset = _dataset(cfg)
    result = exhaustive_search(dataset, cfg.phases, cfg.weights, cfg.tol, cfg.budget)
    _finish(result, cfg, dataset)


def cmd_tune(args) -> None:
    cfg = _config(args)
    dataset = _dataset(cfg)
    chain = _chain(cfg, args.chain)
    tr = tune_chain(dataset, chain, params=cfg.learn, weights=cfg.weights, tol=cfg.tol,
                    rng=make_rng(cfg.learn.seed, chain.chain_id))
    winner, ties = pick_winner([tr])
    _finish(SearchResult("qlearning", [tr], winner, 0, ties), cfg, dataset)


def cmd_evaluate(args) -> None:
    cfg = _config(args)
    dataset = _dataset(cfg)
    chain = _chain(cfg, args.chain)
    actions = ActionTable(chain)
    action = actions[args.action]       # ContractError names the valid range
    out = Path(cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for entry in dataset:
        result = apply_chain(entry.image, chain, action)
        rep = evaluate(result, entry.gt, cfg.weights, cfg.tol)
        write_pgm(out / f"{entry.id}.result.pgm", result)
        rows.append({"image": entry.id, "d_over": rep.d_over, "d_under": rep.d_under,
                     "d_loc": rep.d_loc, "d_total": rep.d_total, "reward": rep.reward,
                     "chi": list(rep.features.as_tuple())})
    summary = {
        "chain_id": chain.chain_id, "name": chain.name, "action_index": args.action,
        "action": {k: _jsonable(v) for k, v in action.named(chain).items()},
        "mean_reward": sum(r["reward"] for r in rows) / len(rows),
        "images": rows,
    }
    with open(out / "evaluate.json", "w") as f:
        json.dump(summary, f, indent=2)
        f.write("\n")
    with open(out / "evaluate.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["image", "d_over", "d_under", "d_loc", "d_total", "reward"])
        for r in rows:
            w.writerow([r["image"], r["d_over"], r["d_under"], r["d_loc"], r["d_total"], r["reward"]])
    print(f"mean reward {summary['mean_reward']:.4f} over {len(rows)} images; results in {out}")


COMMANDS = {"generate": cmd_generate, "search": cmd_search, "exhaustive": cmd_exhaustive,
            "tune": cmd_tune, "evaluate": cmd_evaluate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except (InvalidParameterError, ContractError, DatasetError, BudgetExceededError, OSError) as e:
        print(f"opchain: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

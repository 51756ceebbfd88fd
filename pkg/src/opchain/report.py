"""JSON / CSV reports for search results, plus result images."""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .evaluation import DatasetEntry
from .imaging import apply_chain
from .orchestration import SearchResult
from .pgm import write_pgm
from .qlearn import TuneResult


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def _named(result: TuneResult) -> dict:
    return {k: _jsonable(v) for k, v in result.best_action.named(result.chain).items()}


def chain_block(r: TuneResult) -> dict:
    return {
        "chain_id": r.chain.chain_id,
        "name": r.chain.name,
        "operators": [op.op_id for op in r.chain.operators],
        "action_count": r.action_count,
        "best_action_index": r.best_action_index,
        "best_action": _named(r),
        "best_quality": r.best_quality,
        "candidates": [{"action_index": a, "quality": q}
                       for a, q in sorted(r.candidate_qualities.items())],
        "episodes": [{"image": e.image_id, "steps": e.steps, "final_reward": e.final_reward}
                     for e in r.episode_log],
    }


def report_dict(result: SearchResult, config: dict | None = None, seed: int | None = None) -> dict:
    w = result.winner
    winner_tr = next(r for r in result.chains if r.chain.chain_id == w.chain.chain_id)
    return {
        "method": result.method,
        "seed": seed,
        "config": config,
        "evaluations": result.evaluations,
        "chains": [chain_block(r) for r in sorted(result.chains, key=lambda r: r.chain.chain_id)],
        "winner": {
            "chain_id": w.chain.chain_id,
            "name": w.chain.name,
            "action_index": w.action_index,
            "action": _named(winner_tr),
            "quality": w.quality,
            "tied_chains": list(result.ties),
        },
    }


def write_csv(result: SearchResult, path) -> None:
    with open(path, "w", newline="") as f:
        out = csv.writer(f)
        out.writerow(["chain_id", "chain", "metric", "value"])
        for r in sorted(result.chains, key=lambda r: r.chain.chain_id):
            rewards = [e.final_reward for e in r.episode_log]
            rows = [
                ("action_count", r.action_count),
                ("best_action_index", r.best_action_index),
                ("best_quality", r.best_quality),
                ("episodes", len(r.episode_log)),
                ("mean_episode_steps", float(np.mean([e.steps for e in r.episode_log])) if rewards else ""),
                ("mean_final_reward", float(np.mean(rewards)) if rewards else ""),
                ("winner", int(r.chain.chain_id == result.winner.chain.chain_id)),
            ]
            for metric, value in rows:
                out.writerow([r.chain.chain_id, r.chain.name, metric, value])


def write_result_images(result: SearchResult, dataset: Sequence[DatasetEntry], path) -> list[Path]:
    root = Path(path)
    w = result.winner
    written = []
    for entry in dataset:
        target = root / f"{entry.id}.result.pgm"
        write_pgm(target, apply_chain(entry.image, w.chain, w.action))
        written.append(target)
    return written


def emit_report(result: SearchResult, path, dataset: Sequence[DatasetEntry] | None = None,
                config: dict | None = None, seed: int | None = None) -> dict:
    """Write report.json, report.csv and (given the dataset) the winner's result images."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    data = report_dict(result, config, seed)
    with open(root / "report.json", "w") as f:
        json.dump(data, f, indent=2)
        f.write("\n")
    write_csv(result, root / "report.csv")
    if dataset is not None:
        write_result_images(result, dataset, root)
    return data

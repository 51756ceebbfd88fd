"""
Choosing the chain and its parameters
=====================================

Run the learner over all three default chains on a generated dataset for a
few seeds and compare its winner and cost with exhaustive evaluation.
Writes the dataset and the winner's report under ``demo_out/``.
"""
import time
from pathlib import Path

from opchain import EvaluatorPool, default_config, exhaustive_search, load_dataset, search
from opchain.dataset import generate_synthetic_dataset
from opchain.report import emit_report

out = Path("demo_out")
generate_synthetic_dataset(out / "data", count=10, size=64, seed=0)
dataset = load_dataset(out / "data")
cfg = default_config()

# %%
# The learner, one fresh cache per seed so the evaluation counts are honest.
for seed in range(3):
    t0 = time.perf_counter()
    res = search(dataset, cfg.phases, cfg.learn.with_(seed=seed))
    w = res.winner
    print(f"seed {seed}: {w.chain.name} action {w.action_index} quality {w.quality:.4f} "
          f"({res.evaluations} evaluations, {time.perf_counter() - t0:.1f} s)")

# %%
# Every (chain, action, image) triple.
t0 = time.perf_counter()
ex = exhaustive_search(dataset, cfg.phases, pool=EvaluatorPool(dataset))
w = ex.winner
print(f"exhaustive: {w.chain.name} action {w.action_index} {w.action.named(w.chain)} "
      f"quality {w.quality:.4f} ({ex.evaluations} evaluations, {time.perf_counter() - t0:.1f} s)")
for r in ex.chains:
    print(f"  best of {r.chain.name:28s} {r.best_quality:.4f}")

emit_report(res, out / "report", dataset, cfg.to_dict(), seed=2)
print(f"report for seed 2 in {out / 'report'}")

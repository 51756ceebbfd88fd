"""
Learning the parameters of a single chain
=========================================

Tabular Q-learning over the 432 parameter assignments of the
wiener2 + edge + bwareaopen chain, checked against the best action found
by scoring every assignment on every image.
"""
import time

import numpy as np

from opchain import ChainEvaluator, LearnParams, default_config, enumerate_chains, tune_chain
from opchain.dataset import synthesize
from opchain.evaluation import DatasetEntry
from opchain.metrics import build_ground_truth

rng = np.random.default_rng(0)
dataset = []
for i in range(10):
    img, gt = synthesize(rng, 64, 2, 0.05)
    dataset.append(DatasetEntry(f"img{i:03d}", img, build_ground_truth(gt)))

chain = enumerate_chains(default_config().phases)[2]
evaluator = ChainEvaluator(chain, dataset)
print(f"chain {chain.name}: {len(evaluator.actions)} actions, {len(dataset)} images")

# %%
# Learning.  The evaluator memoizes every (image, action) result so the
# brute-force pass below reuses what the learner already computed.
t0 = time.perf_counter()
tr = tune_chain(dataset, chain, params=LearnParams(seed=3), evaluator=evaluator)
t_learn = time.perf_counter() - t0
steps = [e.steps for e in tr.episode_log]
print(f"{len(tr.episode_log)} episodes, mean {np.mean(steps):.1f} steps, "
      f"{evaluator.evaluations} distinct evaluations, {t_learn:.2f} s")
print("final sweep:", {a: round(q, 4) for a, q in tr.candidate_qualities.items()})
print(f"learned: action {tr.best_action_index} {tr.best_action.named(chain)} quality {tr.best_quality:.4f}")

# %%
# Reference: mean reward of every action.
t0 = time.perf_counter()
means = np.array([evaluator.mean_reward(a) for a in range(len(evaluator.actions))])
best = int(np.argmax(means))
print(f"exhaustive: action {best} {evaluator.actions[best].named(chain)} quality {means[best]:.4f} "
      f"({time.perf_counter() - t0:.2f} s)")
print(f"learned / best = {tr.best_quality / means[best]:.4f}; "
      f"rank of learned action: {int((means > tr.best_quality).sum()) + 1} of {len(means)}")

"""
One image, one chain, one score
===============================

Build a synthetic image with a known contour map, push it through a
pre-filter / edge detector / small-object filter chain and score the
resulting edge map against the ground truth.
"""
import numpy as np

from opchain import ActionSpec, ChainSpec, OperatorSpec, apply_chain, build_ground_truth, evaluate
from opchain.dataset import synthesize
from opchain.metrics import discretize_state

rng = np.random.default_rng(1)
img, gt_edges = synthesize(rng, size=64, shapes=2, noise_sigma=0.05)
gt = build_ground_truth(gt_edges)
print(f"image {img.shape}, {gt.contour_count} reference contours, "
      f"{gt.white_pixels} contour pixels, longest {gt.longest_contour}")

# %%
# A chain is one operator per phase, each with a small value domain.
# An action picks one value for every parameter.
chain = ChainSpec(0, (
    OperatorSpec("wiener2", (("size", (3, 5)),)),
    OperatorSpec("edge", (("method", ("sobel", "prewitt", "log")), ("threshold", (0.02, 0.06, 0.1)))),
    OperatorSpec("bwareaopen", (("min_size", (10, 30)), ("connectivity", (4, 8)))),
))

for values in [((3,), ("sobel", 0.02), (10, 8)),
               ((5,), ("prewitt", 0.06), (30, 8)),
               ((3,), ("log", 0.1), (10, 4))]:
    action = ActionSpec(values)
    edges = apply_chain(img, chain, action)
    rep = evaluate(edges, gt)
    chi = rep.features.as_tuple()
    print(f"{str(action.named(chain)):95s} reward {rep.reward:.3f}  "
          f"(over {rep.d_over:.3f}, under {rep.d_under:.3f}, loc {rep.d_loc:.4f})  "
          f"chi=({chi[0]:.2f}, {chi[1]:.2f}, {chi[2]:.2f}) state {discretize_state(rep.features)}")

# %%
# The ground truth scored against itself is perfect; an empty map misses everything.
print("perfect:", evaluate(gt_edges, gt).reward)
print("empty:  ", round(evaluate(np.zeros_like(gt_edges), gt).reward, 4))

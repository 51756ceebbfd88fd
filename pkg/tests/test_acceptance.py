"""Acceptance criteria, one test each.

Every test prints a single PASS/FAIL line (collected again in the terminal
summary) with the measured value next to the required one.  Run alone with

    pytest tests/test_acceptance.py -v
"""
import json
import time

import numpy as np
import pytest

import oracles
from conftest import report_criterion
from opchain.chains import ActionTable
from opchain.cli import main
from opchain.config import default_config, parse_config
from opchain.dataset import generate_synthetic_dataset, load_dataset
from opchain.imaging import median_filter, order_statistic_filter, remove_small_objects
from opchain.metrics import build_ground_truth, evaluate
from opchain.orchestration import EvaluatorPool, enumerate_chains, exhaustive_search, search
from opchain.qlearn import LearnParams, QTable, q_update

REDUCED = """
phases = preprocessing, processing, postprocessing
phase.preprocessing = medfilt2, wiener2
phase.processing = edge
phase.postprocessing = bwareaopen
medfilt2.size = 3, 5
wiener2.size = 3, 5
edge.method = sobel, prewitt, log
edge.threshold = 0.04, 0.08
bwareaopen.min_size = 10, 30
bwareaopen.connectivity = 8
"""


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("acceptance_data")
    generate_synthetic_dataset(d, count=10, size=64, seed=0)
    return d


@pytest.fixture(scope="module")
def dataset(data_dir):
    return load_dataset(data_dir)


def test_1_oracle_equivalence_small_space(dataset):
    t0 = time.perf_counter()
    cfg = parse_config(REDUCED)
    chains = enumerate_chains(cfg.phases)
    sizes = [len(ActionTable(c)) for c in chains]
    assert len(chains) == 2 and max(sizes) <= 24
    ex = exhaustive_search(dataset, cfg.phases)
    target = (ex.winner.chain.chain_id, ex.winner.action_index)
    pool = EvaluatorPool(dataset)
    params = LearnParams(epsilon=1.0, final_k=None)
    same = 0
    for seed in range(100):
        res = search(dataset, cfg.phases, params.with_(seed=seed), pool=pool)
        same += (res.winner.chain.chain_id, res.winner.action_index) == target
    elapsed = time.perf_counter() - t0
    ok = same >= 95 and elapsed < 120
    report_criterion(1, "oracle equivalence, small space", ok,
                     f"{same}/100 runs match the exhaustive winner (need >= 95), {elapsed:.1f} s (limit 120 s)")
    assert ok


def test_2_near_optimality_default_space(dataset):
    cfg = default_config()
    pool = EvaluatorPool(dataset)
    t0 = time.perf_counter()
    ex = exhaustive_search(dataset, cfg.phases, budget=cfg.budget, pool=pool)
    ex_time = time.perf_counter() - t0
    ratios = []
    for seed in range(10):
        res = search(dataset, cfg.phases, cfg.learn.with_(seed=seed), pool=pool)
        ratios.append(res.winner.quality / ex.winner.quality)
    passed = sum(r >= 0.98 for r in ratios)
    ok = passed == 10 and ex.evaluations == 12_960 and ex_time < 600
    report_criterion(2, "near-optimality, default space", ok,
                     f"{passed}/10 seeds >= 0.98 x exhaustive (min ratio {min(ratios):.4f}); "
                     f"exhaustive {ex.evaluations} evaluations in {ex_time:.1f} s (limit 600 s)")
    assert ok


def test_3_q_update_arithmetic():
    p = LearnParams(alpha=0.1, gamma=0.9)
    q = QTable(2, state_count=2)
    first = q_update(q, 0, 0, 1.0, 1, p)
    q.values[0, 0] = 0.5
    q.values[1] = [0.5, 0.2]
    second = q_update(q, 0, 0, 1.0, 1, p)
    before = q.values.copy()
    q_update(q, 0, 1, 1.0, 1, p.with_(alpha=0.0))
    errs = [abs(first - 0.1), abs(second - 0.595)]
    ok = max(errs) <= 1e-12 and np.array_equal(q.values, before)
    report_criterion(3, "Q-update arithmetic", ok,
                     f"0.1 (err {errs[0]:.1e}), 0.595 (err {errs[1]:.1e}), alpha=0 unchanged: "
                     f"{np.array_equal(q.values, before)} (tol 1e-12)")
    assert ok


def test_4_bandit_convergence():
    rng = np.random.default_rng(0)
    p = LearnParams(alpha=0.1, gamma=0.0)
    argmax_ok, worst = 0, 0.0
    for _ in range(100):
        r = rng.random(int(rng.integers(2, 21)))
        q = QTable(len(r), state_count=1)
        for _ in range(1000):
            for a in rng.permutation(len(r)):
                q_update(q, 0, int(a), float(r[a]), 0, p)
        argmax_ok += int(np.argmax(q.values[0]) == np.argmax(r))
        worst = max(worst, float(np.abs(q.values[0] - r).max()))
    ok = argmax_ok == 100 and worst <= 1e-6
    report_criterion(4, "bandit convergence", ok,
                     f"argmax matches {argmax_ok}/100, max |Q - r| = {worst:.1e} (tol 1e-6)")
    assert ok


def test_5_metric_properties():
    rng = np.random.default_rng(5)
    violations = 0
    for _ in range(10_000):
        shape = tuple(rng.integers(1, 17, size=2))
        res = rng.random(shape) < rng.random()
        gt_m = rng.random(shape) < rng.random()
        gt = build_ground_truth(gt_m)
        rep = evaluate(res, gt, tol=float(rng.uniform(0, 4)))
        vals = (rep.d_over, rep.d_under, rep.d_loc, rep.d_total)
        violations += not all(0.0 <= v <= 1.0 for v in vals)
        violations += evaluate(gt_m, gt).d_total != 0.0
        if gt_m.any():
            empty = evaluate(np.zeros(shape, bool), gt)
            violations += not (empty.d_under == 1.0 and empty.d_loc == 1.0)
    ok = violations == 0
    report_criterion(5, "metric properties", ok, f"{violations} violations over 10000 random pairs (need 0)")
    assert ok


def test_6_operator_oracles():
    rng = np.random.default_rng(6)
    filt_bad = comp_bad = 0
    for _ in range(1000):
        shape = tuple(rng.integers(1, 17, size=2))
        img = np.round(rng.random(shape), 2)
        size = int(rng.choice([3, 5]))
        order = int(rng.integers(1, size * size + 1))
        filt_bad += not np.array_equal(median_filter(img, size), oracles.median_oracle(img, size))
        filt_bad += not np.array_equal(order_statistic_filter(img, size, order),
                                       oracles.rank_filter_oracle(img, size, order))
        m = rng.random(shape) < rng.random()
        k, conn = int(rng.integers(0, 10)), int(rng.choice([4, 8]))
        comp_bad += not np.array_equal(remove_small_objects(m, k, conn), oracles.remove_small_oracle(m, k, conn))
    ok = filt_bad == 0 and comp_bad == 0
    report_criterion(6, "operator oracles", ok,
                     f"filter mismatches {filt_bad}, remove_small_objects mismatches {comp_bad} "
                     f"over 1000 images each (need 0)")
    assert ok


def test_7_enumeration_counts():
    chains = enumerate_chains(default_config().phases)
    counts = [len(ActionTable(c)) for c in chains]
    trips = sum(t.encode(t[i]) == i for t in map(ActionTable, chains) for i in range(len(t)))
    ok = len(chains) == 3 and counts == [432] * 3 and trips == 3 * 432
    report_criterion(7, "enumeration counts", ok,
                     f"{len(chains)} chains ({', '.join(c.name for c in chains)}), actions {counts}, "
                     f"{trips}/{3 * 432} index round-trips")
    assert ok


def test_8_determinism(tmp_path, data_dir):
    reports = []
    for name in ("first", "second"):
        out = tmp_path / name
        assert main(["search", "--data", str(data_dir), "--out", str(out), "--seed", "7"]) == 0
        reports.append(json.loads((out / "report.json").read_text()))
    ok = reports[0] == reports[1]
    report_criterion(8, "determinism", ok, f"two search runs give {'identical' if ok else 'different'} report.json")
    assert ok

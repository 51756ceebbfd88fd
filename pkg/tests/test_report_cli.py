import csv
import json
import re

import pytest

from opchain.cli import main
from opchain.orchestration import search
from opchain.qlearn import LearnParams
from opchain.report import emit_report
from test_orchestration import reduced_phases


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("data")
    assert main(["generate", "--out", str(d), "--count", "3", "--size", "40", "--seed", "2"]) == 0
    return d


@pytest.fixture(scope="module")
def small_cfg(tmp_path_factory):
    f = tmp_path_factory.mktemp("cfg") / "small.cfg"
    f.write_text("""
phases = pre, proc, post
phase.pre = medfilt2, wiener2
phase.proc = edge
phase.post = bwareaopen
medfilt2.size = 3, 5
wiener2.size = 3
edge.method = sobel, log
edge.threshold = 0.04, 0.08
bwareaopen.min_size = 10
bwareaopen.connectivity = 8
learn.episodes = 12
learn.max_steps = 5
""")
    return f


def test_report_contents(tmp_path, small_dataset):
    res = search(small_dataset, reduced_phases(), LearnParams(episodes=0))
    data = emit_report(res, tmp_path, small_dataset, {"k": 1}, seed=0)
    on_disk = json.loads((tmp_path / "report.json").read_text())
    assert on_disk == data
    assert on_disk["chains"][0]["episodes"] == []
    assert on_disk["winner"]["chain_id"] in on_disk["winner"]["tied_chains"]
    assert set(on_disk["winner"]["action"]) == set(dict(res.winner.chain.flat_params()))
    rows = list(csv.reader(open(tmp_path / "report.csv")))
    assert rows[0] == ["chain_id", "chain", "metric", "value"]
    assert len(rows) == 1 + 2 * 7
    assert len(list(tmp_path.glob("*.result.pgm"))) == len(small_dataset)


def test_search_cli(tmp_path, data_dir, small_cfg, capsys):
    assert main(["search", "--data", str(data_dir), "--out", str(tmp_path), "--config", str(small_cfg),
                 "--seed", "1"]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["method"] == "qlearning" and rep["seed"] == 1
    assert len(rep["chains"]) == 2 and all(len(c["episodes"]) == 12 for c in rep["chains"])
    assert "winner: chain" in capsys.readouterr().out


def test_search_deterministic(tmp_path, data_dir, small_cfg):
    for name in "ab":
        assert main(["search", "--data", str(data_dir), "--out", str(tmp_path / name),
                     "--config", str(small_cfg), "--workers", "2"]) == 0
    a, b = (json.loads((tmp_path / n / "report.json").read_text()) for n in "ab")
    assert a == b


def test_exhaustive_tune_evaluate(tmp_path, data_dir, small_cfg):
    assert main(["exhaustive", "--data", str(data_dir), "--out", str(tmp_path / "ex"),
                 "--config", str(small_cfg)]) == 0
    ex = json.loads((tmp_path / "ex" / "report.json").read_text())
    assert ex["evaluations"] == (8 + 4) * 3
    assert main(["tune", "--chain", "1", "--data", str(data_dir), "--out", str(tmp_path / "t"),
                 "--config", str(small_cfg)]) == 0
    t = json.loads((tmp_path / "t" / "report.json").read_text())
    assert [c["chain_id"] for c in t["chains"]] == [1]
    w = ex["winner"]
    assert main(["evaluate", "--chain", str(w["chain_id"]), "--action", str(w["action_index"]),
                 "--data", str(data_dir), "--out", str(tmp_path / "ev"), "--config", str(small_cfg)]) == 0
    ev = json.loads((tmp_path / "ev" / "evaluate.json").read_text())
    assert ev["mean_reward"] == pytest.approx(w["quality"])
    assert len(ev["images"]) == 3


@pytest.mark.parametrize("argv, match", [
    (["evaluate", "--chain", "0", "--action", "99"], r"\[0, 7\]"),
    (["evaluate", "--chain", "5", "--action", "0"], "chain id 5"),
    (["tune", "--chain", "0"], None),
])
def test_cli_errors(tmp_path, data_dir, small_cfg, capsys, argv, match):
    common = ["--data", str(data_dir), "--config", str(small_cfg)]
    if argv[0] != "tune":
        common += ["--out", str(tmp_path)]
    assert main(argv + common) == 1
    err = capsys.readouterr().err
    assert err.startswith("opchain: error:")
    if match:
        assert re.search(match, err)


def test_cli_missing_data_dir(tmp_path, capsys):
    assert main(["search", "--data", str(tmp_path / "none"), "--out", str(tmp_path)]) == 1
    assert "not a directory" in capsys.readouterr().err


def test_cli_usage_error():
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2

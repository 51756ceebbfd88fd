import numpy as np
import pytest

from opchain.config import default_config
from opchain.dataset import synthesize
from opchain.evaluation import DatasetEntry
from opchain.metrics import build_ground_truth


def make_dataset(count=3, size=32, seed=0, noise=0.05, shapes=1):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        img, gt = synthesize(rng, size, shapes, noise)
        out.append(DatasetEntry(f"img{i:03d}", img, build_ground_truth(gt)))
    return out


@pytest.fixture(scope="session")
def small_dataset():
    return make_dataset()


@pytest.fixture(scope="session")
def cfg():
    return default_config()


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = []


def report_criterion(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number} {title}: {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

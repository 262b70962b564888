import os
import re

import numpy as np
import pytest

LONG_ENV = "STEINMVN_LONG"

_ACCEPTANCE_LINES = []


def pytest_collection_modifyitems(config, items):
    if os.environ.get(LONG_ENV) == "1":
        return
    skip = pytest.mark.skip(reason=f"long run; set {LONG_ENV}=1 to enable")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_ACCEPTANCE_LINES, key=_order):
        terminalreporter.write_line(line)


def _order(line):
    m = re.search(r"\bC(\d+)", line)
    return (int(m.group(1)) if m else 99, line)


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion.

    Usage: ``acceptance(name, ok, detail)``; the line is printed at once and
    again in the terminal summary, then ``ok`` is asserted.
    """

    def record(name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        assert ok, line

    return record


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_sample(rng, n, d):
    """Raw data with a random covariance of condition number at most 36."""
    Q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    A = Q * rng.uniform(0.5, 3.0, size=d)
    return rng.normal(size=(n, d)) @ A.T + rng.normal(size=d)


def separated_sample(rng, d):
    """Skewed jittered lattice: no two residuals closer than a few tenths."""
    if d == 1:
        return (np.arange(1.0, 9.0) + rng.uniform(-0.25, 0.25, 8)) ** 1.5
    grid = np.array([(i, j) for i in range(1, 5) for j in range(3)], dtype=float)
    grid += rng.uniform(-0.2, 0.2, grid.shape)
    grid[:, 0] **= 1.4
    return grid

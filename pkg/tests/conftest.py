from __future__ import annotations

import random
import re

import pytest

from postone.generators import seed_from_env


@pytest.fixture
def seed() -> int:
    return seed_from_env()


@pytest.fixture
def rng(seed) -> random.Random:
    return random.Random(seed)


def pytest_terminal_summary(terminalreporter):
    rows = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", getattr(rep, "nodeid", ""))
            if m and rep.when == "call" or (m and outcome == "error"):
                rows[int(m.group(1))] = (outcome, m.group(2))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(rows):
        outcome, name = rows[n]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {name.replace('_', ' ')}")

from __future__ import annotations

import numpy as np
import pytest

CRITERIA_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def criteria_log():
    return CRITERIA_LINES


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

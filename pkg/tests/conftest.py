import math

import pytest

from eprsim import RunConfig


@pytest.fixture
def ideal():
    return RunConfig()


def binomial_sigma(p, n):
    return math.sqrt(p * (1.0 - p) / n)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

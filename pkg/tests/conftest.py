import numpy as np
import pytest

from nlft import random_batch

ACCEPTANCE_LINES: dict = {}


def record(criterion: int, title: str, passed: bool, detail: str) -> None:
    """Store one acceptance line and echo it to captured stdout."""
    line = f"criterion {criterion:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE_LINES[criterion] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture(scope="session")
def acceptance_batch():
    """1000 sequences, window at most 32, moduli at most 0.9."""
    return random_batch(1000, 32, 0.9, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

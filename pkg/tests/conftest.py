import numpy as np
import pytest

from dfmlab.lattice import Lattice

ACCEPTANCE = []


@pytest.fixture
def record():
    """Record one acceptance line: record(number, passed, detail)."""
    def _record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE.append((number, line))
        print(line)
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def lat44():
    return Lattice((4, 4))


@pytest.fixture
def lat22():
    return Lattice((2, 2))

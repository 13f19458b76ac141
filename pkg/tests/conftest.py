import numpy as np
import pytest

from polyurn import hypergraph as hg

_CRITERIA: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the summary is printed at session end."""

    def record(name: str, passed: bool, detail: str = "") -> bool:
        _CRITERIA.append((name, bool(passed), detail))
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20231018)


@pytest.fixture
def cube():
    return hg.cube()


@pytest.fixture
def tetrahedron():
    return hg.tetrahedron()


@pytest.fixture
def path3():
    return hg.path(3)


@pytest.fixture
def triangle():
    return hg.cycle(3)


def random_interior(rng, m, floor=0.02):
    v = rng.dirichlet(np.full(m, 2.0)) + floor
    return v / v.sum()

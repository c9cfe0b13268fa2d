import numpy as np
import pytest

from formation_anneal.topology import circle, star

# Five-agent experiment data: target square with a centre agent, and the
# initial condition used for both topologies.
SQUARE_TARGET = np.array([[0, 0], [-1, 1], [1, 1], [1, -1], [-1, -1]], dtype=float)
SPREAD_INITIAL = np.array([[1, 2], [-2, -1], [1, -1], [3, -2], [-3, 2]], dtype=float)

_criteria: list[tuple[str, bool, str]] = []


@pytest.fixture
def q():
    return SQUARE_TARGET.copy()


@pytest.fixture
def p0():
    return SPREAD_INITIAL.copy()


@pytest.fixture
def star5():
    return star(5)


@pytest.fixture
def circle5():
    return circle(5)


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


@pytest.fixture
def criterion(request):
    """Record a named acceptance criterion; the outcome is printed after the run."""
    name = request.node.get_closest_marker("criterion").args[0]
    details = {}
    yield details
    rep = getattr(request.node, "rep_call", None)
    passed = rep is not None and rep.passed
    _criteria.append((name, passed, details.get("detail", "")))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _criteria:
        line = f"{'PASS' if passed else 'FAIL'}  {name}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)

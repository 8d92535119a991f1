import pytest

from mtcluster.depgraph import DependencyGraph

# filled by test_acceptance; printed once at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def triangle():
    return DependencyGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def path4():
    return DependencyGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])

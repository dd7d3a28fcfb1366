import numpy as np
import pytest

from avgmix import make_graph


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


SMALL_FAMILIES = [
    "complete:6",
    "path:7",
    "cycle:8",
    "star:6",
    "dumbbell:4",
    "btree:15",
    "bipartite:3,4",
    "regular:12,3,2",
]


@pytest.fixture(params=SMALL_FAMILIES)
def small_graph(request):
    return make_graph(request.param)


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])

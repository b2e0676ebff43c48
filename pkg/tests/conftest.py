import sys

import pytest

from rumornet.graph import InformationGraph, UserNode


@pytest.fixture(params=[True, False], ids=["numba", "numpy"])
def use_numba(request):
    return request.param


@pytest.fixture
def star():
    g = InformationGraph()
    g.add_user(UserNode("C", 100))
    for i in range(1, 6):
        g.add_user(UserNode(f"L{i}", i))
        g.add_edge("C", f"L{i}", 1)
    return g


@pytest.fixture
def path3():
    g = InformationGraph()
    for u in "ABC":
        g.add_user(UserNode(u))
    g.add_edge("A", "B", 1).add_edge("B", "C", 1)
    return g



def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

from __future__ import annotations

import pytest

from graphs import complete_graph, cycle_graph, path_graph, star_graph


@pytest.fixture
def p5():
    return path_graph(5)


@pytest.fixture
def star4():
    return star_graph(4)


@pytest.fixture
def c6():
    return cycle_graph(6)


@pytest.fixture
def k4():
    return complete_graph(4)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)

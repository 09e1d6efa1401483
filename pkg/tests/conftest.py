import sys

import pytest

from bmtrmld.trees import parse_newick

TREE16 = "(1,2,(3,4,5));"


@pytest.fixture
def tree16():
    return parse_newick(TREE16)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)

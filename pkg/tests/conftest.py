import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from crowdmine import construct_itemset_taxonomy  # noqa: E402
from crowdmine.generators import gen_cycling  # noqa: E402

CYCLING_EDGES = [(1, 3), (1, 4), (2, 4)]


@pytest.fixture
def cycling():
    return gen_cycling()


@pytest.fixture
def cycling_it(cycling):
    return construct_itemset_taxonomy(cycling)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        ok, detail = mod.RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

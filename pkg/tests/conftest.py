from __future__ import annotations

import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from locallimit.measures import marginals_atom, marginals_regular, marginals_rooted, marginals_ugw, mixture  # noqa: E402

HALF = Fraction(1, 2)
UGW13 = {1: HALF, 3: HALF}


@pytest.fixture(scope="session")
def ugw13_depth4():
    return marginals_ugw(UGW13, 3, 4)


@pytest.fixture(scope="session")
def regular3_depth4():
    return marginals_regular(3, 4)


@pytest.fixture(scope="session")
def regular2_depth3():
    return marginals_regular(2, 3)


@pytest.fixture(scope="session")
def path3_depth3():
    return marginals_atom(3, [(0, 1), (1, 2)], 3)


@pytest.fixture(scope="session")
def endpoint_path3():
    return marginals_rooted(3, [(0, 1), (1, 2)], 0, 3)


@pytest.fixture(scope="session")
def unbiased_gw():
    return marginals_ugw(UGW13, 3, 3, size_biased=False)


@pytest.fixture(scope="session")
def cycles_and_edges():
    """Half regular(2), half a single edge: two ball types at every radius."""
    return mixture([(marginals_regular(2, 3), HALF), (marginals_atom(2, [(0, 1)], 3, d=2), HALF)])


ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion and assert on it."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE.append(line)
        print(line, flush=True)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

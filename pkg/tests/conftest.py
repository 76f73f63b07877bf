import os

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from buchiavg.core import PLAYER1, RANDOM, Mdp

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES: list[str] = []


@st.composite
def mdps(draw, max_n=7, max_degree=3):
    """Small well-formed MDPs with arbitrary kinds and Büchi sets."""
    n = draw(st.integers(1, max_n))
    succ = []
    for _ in range(n):
        k = draw(st.integers(1, min(max_degree, n)))
        succ.append(tuple(sorted(draw(st.sets(st.integers(0, n - 1), min_size=k, max_size=k)))))
    kinds = "".join(draw(st.lists(st.sampled_from([PLAYER1, RANDOM]), min_size=n, max_size=n)))
    buchi = draw(st.frozensets(st.integers(0, n - 1)))
    return Mdp(tuple(succ), kinds, buchi)


@pytest.fixture
def srb():
    """s (player 1, self-loop), r (random, edges to s and b), b (player 1, self-loop, Büchi)."""
    return Mdp(((0,), (0, 2), (2,)), "PRP", frozenset({2}))


@pytest.fixture
def acceptance():
    def record(number, ok, detail):
        line = f"ACCEPTANCE {number:>3} {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: (int(l.split()[1].rstrip("abc")), l)):
            terminalreporter.write_line(line)

import os
import sys

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from tauberian.game import MAX, GameSpec, Policy, SwitchSchedule

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []

payoffs = st.sampled_from([0.0, 0.125, 0.25, 0.5, 0.75, 1.0]) | st.floats(0.0, 1.0)


@st.composite
def games(draw, max_states=4, max_actions=3):
    n = draw(st.integers(1, max_states))
    g = [draw(payoffs) for _ in range(n)]
    trans = []
    for _ in range(n):
        na = draw(st.integers(1, max_actions))
        nb = draw(st.integers(1, max_actions))
        trans.append([[draw(st.integers(0, n - 1)) for _ in range(nb)] for _ in range(na)])
    return GameSpec.build(g, trans, "random")


@st.composite
def policies(draw, spec, side):
    return Policy.of(side, [draw(st.integers(0, spec.n_actions(side, s) - 1))
                            for s in range(spec.n_states)])


@st.composite
def schedules(draw, spec, side=MAX, max_segments=4, max_start=12):
    k = draw(st.integers(1, max_segments))
    starts = sorted(set([0] + [draw(st.integers(1, max_start)) for _ in range(k - 1)]))
    return SwitchSchedule(tuple((t, draw(policies(spec, side))) for t in starts))


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

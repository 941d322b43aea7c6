import os
import sys

import pytest
from hypothesis import HealthCheck, settings

from traceseq.model import Event, UserSequence

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

T0 = 1_714_550_400  # 2024-05-01T08:00:00Z


def ev(user, t, platform, activity, content=None):
    return Event(user, T0 + t, platform, activity, content)


def seq(user, items):
    """items: (seconds offset, platform, activity) triples."""
    return UserSequence.from_events([ev(user, t, p, a) for t, p, a in items], user)


@pytest.fixture
def tmp_csv(tmp_path):
    def make(text, name="events.csv"):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return p
    return make


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is not None and mod.LINES:
        terminalreporter.section("acceptance criteria")
        for line in mod.LINES:
            terminalreporter.write_line(line)

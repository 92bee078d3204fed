import re

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# numerics dominate runtime; wall-clock deadlines only cause flakes
settings.register_profile(
    "numeric",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("numeric")


@pytest.fixture
def rng():
    return np.random.default_rng(20260825)


# one terminal line per acceptance criterion, independent of output capture
_CRITERION_RE = re.compile(r"test_criterion_(\d+)")
_criterion_outcomes = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = _CRITERION_RE.match(item.name)
    if m is None:
        return
    key = int(m.group(1))
    if rep.failed:
        _criterion_outcomes[key] = (item.name, False)
    elif rep.when == "call" and rep.passed:
        _criterion_outcomes.setdefault(key, (item.name, True))


def pytest_terminal_summary(terminalreporter):
    if not _criterion_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_criterion_outcomes):
        name, ok = _criterion_outcomes[key]
        terminalreporter.write_line(
            f"{name}: {'PASS' if ok else 'FAIL'}")

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# (criterion id, passed, detail) filled in by test_acceptance.py
ACCEPTANCE_LINES = []


@pytest.fixture
def record_criterion():
    def record(cid, passed, detail):
        ACCEPTANCE_LINES.append((cid, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for cid, passed, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {cid}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_RESULTS = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion; summary printed at the end."""

    def record(number: int, title: str, passed: bool, detail: str = ""):
        line = f"ACCEPTANCE [{'PASS' if passed else 'FAIL'}] {number:2d} {title}" + (f" :: {detail}" if detail else "")
        ACCEPTANCE_RESULTS.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(line)

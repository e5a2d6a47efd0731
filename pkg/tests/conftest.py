import os
import sys

import mpmath
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.SUMMARY:
        terminalreporter.section("acceptance criteria")
        for line in mod.SUMMARY:
            terminalreporter.write_line(line)


@pytest.fixture(autouse=True)
def _mpmath_precision():
    # oracles assume 60 digits; tests that lower it must not leak into others
    with mpmath.workdps(60):
        yield

import os

import pytest
from hypothesis import HealthCheck, settings

from hyperdelta.curve import build_curve
from hyperdelta.invariants import Surface

settings.register_profile(
    "default", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

X5M1 = [1, 0, 0, 0, 0, -1]
X5MX = [1, 0, 0, 0, -1, 0]
X7MX = [1, 0, 0, 0, 0, 0, -1, 0]


@pytest.fixture(scope="session")
def quintic():
    """y^2 = x^5 - 1."""
    return Surface(build_curve(coefficients=X5M1))


@pytest.fixture(scope="session")
def quintic_x():
    """y^2 = x^5 - x."""
    return Surface(build_curve(coefficients=X5MX))


@pytest.fixture(scope="session")
def septic():
    """y^2 = x^7 - x (genus 3)."""
    return Surface(build_curve(coefficients=X7MX))


# acceptance criteria report one line each in the terminal summary
_ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Record ``(number, passed, detail)`` for the acceptance summary."""
    def record(number: int, passed: bool, detail: str) -> bool:
        prev = _ACCEPTANCE.get(number)
        if prev is not None:
            passed = passed and prev[0]
            detail = f"{prev[1]}; {detail}"
        _ACCEPTANCE[number] = (bool(passed), detail)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}")

import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from hngarch_portfolio import CHRISTOFFERSEN, GarchParams, Preferences, long_run_variance

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def cp():
    return CHRISTOFFERSEN


@pytest.fixture
def hbar():
    return long_run_variance(CHRISTOFFERSEN)


@pytest.fixture(autouse=True)
def _quiet_conjecture_warning():
    from hngarch_portfolio import ConjecturedOptimalityWarning

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConjecturedOptimalityWarning)
        yield


@st.composite
def stationary_params(draw, max_persistence=0.999):
    """Random nonnegative HN-GARCH parameters with persistence below ``max_persistence``."""
    alpha = draw(st.floats(0.0, 2e-5))
    theta = draw(st.floats(0.0, 300.0))
    leverage = alpha * theta**2
    if leverage >= max_persistence:
        theta = 0.0
        leverage = 0.0
    beta = draw(st.floats(0.0, 1.0)) * (max_persistence - leverage)
    return GarchParams(
        omega=draw(st.floats(0.0, 1e-7)),
        beta=beta,
        alpha=alpha,
        theta=theta,
        lam=draw(st.floats(-0.4, 5.0)),
        r=draw(st.floats(0.0, 5e-4)),
    )


negative_gamma = st.floats(-20.0, -0.1)


# -- acceptance report ------------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: str, title: str, ok: bool, detail: str = "") -> bool:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:<5} {title}" + (f" | {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import random

import pytest
from hypothesis import HealthCheck, settings

from a2e.credential import issue_locally
from a2e.crypto_core.hashing import attr_to_scalar
from a2e.crypto_core.params import setup
from a2e.protocol import WorldConfig, build_world, run_issue_phase

settings.register_profile(
    "a2e", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("a2e")

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def params():
    return setup()


@pytest.fixture(scope="session")
def issuance(params):
    """One N=5 issuance reused by read-only credential tests."""
    attrs = [attr_to_scalar(f"attr{j}") for j in range(1, 6)]
    return issue_locally(params, attrs, random.Random(11))


@pytest.fixture
def small_world():
    """N=5, M=10 world with a credential for U1."""
    world = build_world(WorldConfig(N=5, M=10, pool_size=8), seed=3, users=14)
    run_issue_phase(world, "U1", [f"attr{j}" for j in range(1, 6)])
    return world


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

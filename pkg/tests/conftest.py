import numpy as np
import pytest
from hypothesis import settings

from damekricci.geometry import H3, SpaceParams
from damekricci.spectral import calibrate
from damekricci.spherical import SphericalEvaluator

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

TEST_SPACES = [H3, SpaceParams(2, 1), SpaceParams(4, 3)]

_EVALUATORS = {}


def calibrated(space):
    """Session-wide calibrated evaluator per geometry (shares the phi cache across tests)."""
    key = space.geometry
    if key not in _EVALUATORS:
        _EVALUATORS[key] = calibrate(SphericalEvaluator(SpaceParams(*key)))
    return _EVALUATORS[key]


@pytest.fixture(scope="session")
def h3_eval():
    return calibrated(H3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_line():
    """Record a one-line pass/fail verdict; the lines are repeated in the terminal summary."""

    def record(number, ok, detail):
        line = f"CRITERION {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

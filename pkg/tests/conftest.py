import numpy as np
import pytest
from hypothesis import settings

from svanish import LayeredStructure

settings.register_profile("svanish", max_examples=60, deadline=None)
settings.load_profile("svanish")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def example_structure():
    """Starting point of the six-layer design example."""
    return LayeredStructure.uniform_radii([3.0, 6.0] * 3, [3.0, 6.0] * 3)


def random_structure(rng, layers, low=0.5, high=5.0):
    return LayeredStructure.uniform_radii(rng.uniform(low, high, layers), rng.uniform(low, high, layers))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(LINES):
            terminalreporter.write_line(LINES[number])

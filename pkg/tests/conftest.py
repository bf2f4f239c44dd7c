import math

import numpy as np
import pytest
from hypothesis import settings

from levy_liouville.levy_core import (
    Atoms,
    IsotropicStable,
    LevyTriplet,
    RadialDensity,
    RadialProfile,
)

settings.register_profile("pkg", deadline=None, max_examples=60)
settings.load_profile("pkg")


def stable(alpha, scale=1.0, dim=1):
    return LevyTriplet(np.zeros(dim), np.zeros((dim, dim)), (IsotropicStable(alpha, scale, dim),))


def triplet_corpus():
    """Ten triplets of mixed type used by the symbol inequality suite."""
    radial = RadialDensity(RadialProfile("power", 1.0, 1.5), 0.1, 2.0, 1)
    return {
        "bm": LevyTriplet.brownian(1),
        "bm_drift": LevyTriplet.brownian(1, drift=[1.0]),
        "poisson1": LevyTriplet.poisson([1.0]),
        "delta23": LevyTriplet.poisson([2.0, 3.0]),
        "small_atoms": LevyTriplet.poisson([0.5, -0.25, 1.5], [2.0, 1.0, 0.5], drift=[0.3]),
        "weierstrass": LevyTriplet.poisson([3.0 ** k * math.pi for k in range(5)],
                                           [0.5 ** k for k in range(5)]),
        "stable05": stable(0.5),
        "stable15": stable(1.5, 2.0),
        "radial_mix": LevyTriplet([0.2], [[0.5]], (radial, Atoms([[1.0]], [1.0]))),
        "planar": LevyTriplet([0.1, -0.2], [[1.0, 0.2], [0.2, 0.0 + 0.5]],
                              (Atoms([[1.0, 0.0], [0.3, -0.4]], [1.0, 2.0]),)),
    }


@pytest.fixture
def corpus():
    return triplet_corpus()


# one line per acceptance criterion, filled in by tests/test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])

import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def two_unit():
    """Two unit balls one Å apart."""
    return np.array([[0.0, 0, 0], [1.0, 0, 0]]), np.array([1.0, 1.0])


@pytest.fixture
def engulfing():
    """A radius-1 ball internally tangent to a radius-3 ball."""
    return np.array([[0.0, 0, 0], [2.0, 0, 0]]), np.array([9.0, 1.0])


def regular_tetrahedron(edge=1.0):
    P = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], float)
    return P * edge / (2 * np.sqrt(2))

import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from kahlerenv.projective import TupleShape

settings.register_profile("ci", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))


@pytest.fixture
def shape22():
    return TupleShape(2, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_coords(rng, size, rmin=0.3, rmax=1.0):
    r = rng.uniform(rmin, rmax, size)
    return r * np.exp(1j * rng.uniform(0, 2 * np.pi, size))

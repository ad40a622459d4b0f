import numpy as np
import pytest

from geosampling.core import SignalSpec, build_signal, estimate_curvature


@pytest.fixture(scope="session")
def sphere():
    s = build_signal(SignalSpec("sphere-cap", {"r": 2.0, "disk": 1.0}, shape=(81, 81)))
    return s, estimate_curvature(s)


@pytest.fixture
def rng():
    return np.random.default_rng(0)

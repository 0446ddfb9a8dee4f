import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hidaprop.kernels import OscillatorProblem
from hidaprop.measures import SignedMeasure

settings.register_profile("repo", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def sample_problem():
    return OscillatorProblem.make(0.0, 0.5, 1.0, 0.3, 0.3)


@pytest.fixture(scope="session")
def sample_measure(sample_problem):
    return SignedMeasure.point_mass(0.2, 0.0, sample_problem.window)

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import lormin.gallery as gallery

settings.register_profile(
    "lormin",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("lormin")


@pytest.fixture(scope="session")
def bundle():
    return gallery.example()


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)

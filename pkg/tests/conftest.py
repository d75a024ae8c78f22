import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hilbert_ksd.experiments import brownian_setting, gibbs_setting
from hilbert_ksd.fn_space import make_uniform_grid
from hilbert_ksd.targets import brownian_motion_target

settings.register_profile(
    "default", max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def grid100():
    return make_uniform_grid(0.0, 1.0, 100)


@pytest.fixture(scope="session")
def grid512():
    return make_uniform_grid(0.0, 1.0, 512)


@pytest.fixture(scope="session")
def bm512(grid512):
    return brownian_motion_target(grid512)


@pytest.fixture(scope="session")
def bsetting():
    return brownian_setting(100)


@pytest.fixture(scope="session")
def gsetting():
    return gibbs_setting(129)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

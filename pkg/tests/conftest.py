import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from echoroom.acoustics import Room
from echoroom.geometry import Point2, rectangle

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def room_6x5() -> Room:
    return Room.rectangular(6.0, 5.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)

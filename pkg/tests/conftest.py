import numpy as np
import pytest

from rotcubics.lie_core import exp_so3


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_tangent(rng, x, scale=1.0):
    v = rng.normal(size=3)
    v = v - (v @ x) * x
    return scale * v / np.linalg.norm(v)


def random_rotation(rng, max_angle=np.pi - 0.2):
    axis = random_unit(rng)
    return exp_so3(rng.uniform(0.0, max_angle) * axis)


def random_spd(rng):
    r = random_rotation(rng)
    return r @ np.diag(rng.uniform(0.5, 3.0, size=3)) @ r.T

from math import sqrt

import pytest

from fundamental_ratio.moduli import RegionSpec

from .fakes import make_certify


EQUILATERAL_VERTICES = ((0.0, 0.0), (1.0, 0.0), (0.5, sqrt(3.0) / 2.0))
UNIT_SQUARE = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))


@pytest.fixture
def equilateral():
    return EQUILATERAL_VERTICES


@pytest.fixture
def unit_square():
    return UNIT_SQUARE


@pytest.fixture
def mini_region():
    return RegionSpec(q_min=0.30, q_max=0.40, p_min=0.5, p_max=0.6)


@pytest.fixture
def constant_certify():
    return lambda xi_h: make_certify(lambda p, q: xi_h)

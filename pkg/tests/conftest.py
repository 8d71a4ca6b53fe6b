from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from polysym.exactalg import poly_ring

settings.register_profile("polysym", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("polysym")


@pytest.fixture
def R2():
    return poly_ring(("x", "y"))


@pytest.fixture
def R3():
    return poly_ring(("x", "y", "z"))


def small_rationals():
    return st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def polys(draw, ring, max_terms: int = 4, max_deg: int = 2):
    """Random sparse polynomials of low degree over ``ring``."""
    n = ring.ngens
    p = ring.zero
    for _ in range(draw(st.integers(0, max_terms))):
        c = draw(st.integers(-3, 3))
        mono = ring.one
        for _ in range(draw(st.integers(0, max_deg))):
            mono *= ring.gens[draw(st.integers(0, n - 1))]
        p += c * mono
    return p


def points(n: int):
    return st.tuples(*[small_rationals() for _ in range(n)])


def as_fraction_point(p):
    return tuple(Fraction(v) for v in p)

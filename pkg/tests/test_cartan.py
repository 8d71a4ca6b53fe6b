from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import flow_lie_derivative, form_value, linear_field, random_field, random_form, random_map
from polysym.cartan import (KForm, PolyMap, VectorField, ext_d, interior, lie_bracket, lie_derivative,
                            pullback)
from polysym.exactalg import poly_ring

R2 = poly_ring(("x", "y"))
R3 = poly_ring(("x", "y", "z"))
x, y = R2.gens


def one(ring, coeffs):
    return KForm.one_forms(ring, [coeffs])


def two(ring, comps):
    return KForm(ring, 2, tuple(comps))


# -- ext_d --------------------------------------------------------------------------

def test_d_of_x_dy():
    assert ext_d(one(R2, [0, x])) == two(R2, [{(0, 1): 1}])


def test_d_of_constants():
    assert ext_d(KForm.functions(R2, [R2(3), R2(-1)])).is_zero()


def test_d_of_exact_form():
    assert ext_d(one(R2, [y, x])).is_zero()


def test_degree_above_dimension_is_zero():
    w = two(R2, [{(0, 1): x * y}])
    assert ext_d(w).is_zero() and ext_d(w).r == 3


# -- interior -----------------------------------------------------------------------

def test_interior_basis():
    assert interior(VectorField.coordinate(R2, 0), two(R2, [{(0, 1): 1}])) == one(R2, [0, 1])


def test_interior_zero():
    assert interior(VectorField.coordinate(R3, 2), two(R3, [{(0, 1): 1}])).is_zero()


def test_interior_x_dy():
    X = VectorField(R2, (R2.zero, x))
    w = two(R2, [{(0, 1): 1}, {(0, 1): 2}])
    got = interior(X, w)
    assert got == KForm.one_forms(R2, [[-x, 0], [-2 * x, 0]])
    # oracle: numeric contraction ω(X, v) at three points
    for pt in [(1.5, -2.0), (0.25, 3.0), (-4.0, 1.0)]:
        Xv = [0.0, pt[0]]
        for j in range(2):
            for v in ([1.0, 0.0], [0.0, 1.0]):
                assert form_value(got, j, pt, [v]) == pytest.approx(form_value(w, j, pt, [Xv, v]))


# -- brackets and Lie derivative -------------------------------------------------------

def test_bracket_examples():
    dx = VectorField.coordinate(R2, 0)
    assert lie_bracket(dx, VectorField(R2, (R2.zero, x))) == VectorField.coordinate(R2, 1)
    X = VectorField(R2, (x * y, y))
    assert lie_bracket(X, X).is_zero()
    assert lie_bracket(VectorField(R2, (x, R2.zero)), VectorField(R2, (R2.zero, y))).is_zero()


def test_lie_derivative_examples():
    dx = VectorField.coordinate(R2, 0)
    assert lie_derivative(dx, one(R2, [0, x])) == one(R2, [0, 1])
    assert lie_derivative(VectorField(R2, (y, x)), KForm.zero(R2, 1, 1)).is_zero()
    assert lie_derivative(dx, two(R2, [{(0, 1): 1}])).is_zero()


# -- pullback -----------------------------------------------------------------------

def test_pullback_identity():
    w = two(R2, [{(0, 1): x * x + y}])
    assert pullback(PolyMap.identity(R2), w) == w


def test_pullback_to_curve_vanishes():
    U = poly_ring(("u",))
    u = U.gens[0]
    assert pullback(PolyMap(U, R2, (u, u * u)), two(R2, [{(0, 1): 1}])).is_zero()


def test_pullback_linear_change():
    U = poly_ring(("u", "v"))
    u, v = U.gens
    got = pullback(PolyMap(U, R2, (u + v, u - v)), two(R2, [{(0, 1): 1}]))
    assert got == two(U, [{(0, 1): -2}])


# -- properties ---------------------------------------------------------------------------

seeds = st.integers(0, 10 ** 6)


@given(seeds, st.integers(0, 2))
def test_dd_is_zero(seed, r):
    w = random_form(random.Random(seed), R3, r, 2)
    assert ext_d(ext_d(w)).is_zero()


@given(seeds)
def test_interior_antisymmetry(seed):
    rng = random.Random(seed)
    w = random_form(rng, R3, 2, 2)
    X, Y = random_field(rng, R3), random_field(rng, R3)
    assert interior(X, interior(Y, w)) == -interior(Y, interior(X, w))


@given(seeds, st.integers(0, 2))
def test_pullback_commutes_with_d(seed, r):
    rng = random.Random(seed)
    w = random_form(rng, R3, r, 1)
    f = random_map(rng, R2, R3)
    assert pullback(f, ext_d(w)) == ext_d(pullback(f, w))


@given(seeds)
def test_pullback_functorial(seed):
    rng = random.Random(seed)
    w = random_form(rng, R3, 1, 1)
    f = random_map(rng, R2, R3)
    g = random_map(rng, R2, R2)
    assert pullback(f.compose(g), w) == pullback(g, pullback(f, w))


@given(seeds)
def test_bracket_jacobi(seed):
    rng = random.Random(seed)
    X, Y, Z = (random_field(rng, R2) for _ in range(3))
    total = VectorField(R2, tuple(a + b + c for a, b, c in zip(
        lie_bracket(X, lie_bracket(Y, Z)).coeffs, lie_bracket(Y, lie_bracket(Z, X)).coeffs,
        lie_bracket(Z, lie_bracket(X, Y)).coeffs)))
    assert total.is_zero()


@given(seeds)
def test_lie_derivative_commutes_with_d(seed):
    rng = random.Random(seed)
    w = random_form(rng, R3, 1, 1)
    X = random_field(rng, R3)
    assert ext_d(lie_derivative(X, w)) == lie_derivative(X, ext_d(w))


@pytest.mark.parametrize("seed", range(20))
def test_lie_derivative_matches_flow(seed):
    rng = random.Random(seed)
    A = np.array([[rng.randint(-2, 2) for _ in range(3)] for _ in range(3)])
    X = linear_field(A, R3)
    w = random_form(rng, R3, 2, 1, terms=3, max_deg=2)
    L = lie_derivative(X, w)
    nrng = np.random.default_rng(seed)
    p = nrng.uniform(-1, 1, 3)
    v1, v2 = nrng.uniform(-1, 1, 3), nrng.uniform(-1, 1, 3)
    assert form_value(L, 0, p, [v1, v2]) == pytest.approx(flow_lie_derivative(A, w, 0, p, [v1, v2]), abs=1e-6)

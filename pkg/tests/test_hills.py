from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coarsegrain.errors import DomainError
from coarsegrain.hills import (
    PiecewisePoly,
    hill_build,
    hill_eval,
    hill_eval_explicit,
    identity_rhs,
    mean_operator,
)

KS = range(1, 8)


@pytest.mark.parametrize("k", KS)
def test_unit_mass(k):
    assert hill_build(k).integral() == 1


@pytest.mark.parametrize("k", KS)
def test_symmetry_exact(k):
    h = hill_build(k)
    for n in range(0, 8 * k + 1):
        xi = Fraction(n, 8)
        if 0 < xi < k:
            assert h(xi) == h(k - xi)


@pytest.mark.parametrize("k", range(2, 8))
def test_mean_recursion_exact(k):
    prev = hill_build(k - 1)
    h = hill_build(k)
    for n in range(-4, 8 * k + 9):
        xi = Fraction(n, 8)
        assert h(xi) == mean_operator(prev, xi)


@pytest.mark.parametrize("k", KS)
def test_support_and_edge_pieces(k):
    h = hill_build(k)
    assert h(Fraction(-1, 3)) == 0 and h(k) == 0 and h(k + 1) == 0
    for xi in (Fraction(1, 3), Fraction(3, 4)):
        assert h(xi) == xi ** (k - 1) / math.factorial(k - 1)
        assert h(k - xi) == xi ** (k - 1) / math.factorial(k - 1)


@pytest.mark.parametrize("k", KS)
def test_top_derivative_values(k):
    d = hill_build(k).derivative(k - 1)
    for j in range(k):
        assert d(Fraction(2 * j + 1, 2)) == (-1) ** j * math.comb(k - 1, j)


@pytest.mark.parametrize("k", KS)
def test_top_derivative_jumps_are_binomials(k):
    jumps = hill_build(k).derivative(k - 1).jumps()
    assert jumps == [(-1) ** j * math.comb(k, j) for j in range(k + 1)]


@pytest.mark.parametrize("k", range(2, 8))
def test_smoothness_order(k):
    h = hill_build(k)
    for ell in range(k - 1):
        assert all(j == 0 for j in h.derivative(ell).jumps())
    assert any(j != 0 for j in h.derivative(k - 1).jumps())


@pytest.mark.parametrize("k", range(2, 8))
def test_identity_on_grid(k):
    h = hill_build(k)
    for xi in np.linspace(-0.5, k + 0.5, 301):
        assert abs(h(float(xi)) - identity_rhs(k, float(xi))) <= 1e-12
    for n in range(0, 8 * k):
        xi = Fraction(n, 8)
        assert h(xi) == identity_rhs(k, xi)


@pytest.mark.parametrize("k", KS)
def test_explicit_sum_matches_pieces(k):
    for ell in range(k):
        for n in range(0, 8 * k):
            xi = Fraction(n, 8)
            assert hill_eval(k, ell, xi) == hill_eval_explicit(k, ell, xi)


@pytest.mark.parametrize("k", range(3, 8))
def test_derivative_against_finite_differences(k):
    # central differences are O(h^2); halving h should cut the error by ~4
    xi = 0.37 + (k - 1) / 2
    exact = hill_eval(k, 1, xi)
    errs = []
    for h in (1e-2, 5e-3):
        fd = (hill_eval(k, 0, xi + h) - hill_eval(k, 0, xi - h)) / (2 * h)
        errs.append(abs(fd - exact))
    assert errs[1] <= errs[0] / 3.5 + 1e-13


def test_known_values():
    assert hill_eval(3, 0, 1.5) == pytest.approx(0.75)
    assert hill_eval(4, 3, 1.5) == -3
    assert mean_operator(hill_build(2), Fraction(1, 2)) == Fraction(1, 8)


def test_domain_errors():
    with pytest.raises(DomainError):
        hill_eval(3, 3, 1.0)
    with pytest.raises(DomainError):
        hill_build(0)
    with pytest.raises(DomainError):
        PiecewisePoly((0, 1), ())


def test_mean_operator_quadrature_path():
    val = mean_operator(lambda t: t * t, 1.0)
    assert val == pytest.approx(1 / 3, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 7), st.floats(-1.0, 8.0))
def test_vectorized_matches_scalar(k, xi):
    h = hill_build(k)
    assert h.evaluate([xi])[0] == pytest.approx(h(xi), abs=1e-14)
    assert h(xi) >= -1e-15

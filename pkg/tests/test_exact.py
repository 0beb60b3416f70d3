from __future__ import annotations

import itertools
import math

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from coarsegrain.errors import DomainError, ResourceError
from coarsegrain.exact import (
    CaseIndex,
    GrainParams,
    classify_case,
    grain_primes,
    kappa_exact,
    kappa_split,
    pi_exact,
)


def brute(B, C, k, x):
    primes = list(sympy.primerange(B + 1, C + 1))
    tuples = [t for t in itertools.product(primes, repeat=k) if math.prod(t) <= x]
    return len(tuples), len({math.prod(t) for t in tuples})


def test_small_instance_values():
    p = GrainParams(10, 30, 2)
    assert kappa_exact(p, 400) == 26
    assert pi_exact(p, 400) == 15
    assert pi_exact(p, 120) == 0


def test_single_prime_level():
    # primes in ]10, 30] up to 20 are 11, 13, 17, 19
    p = GrainParams(10, 30, 1)
    assert kappa_exact(p, 20) == 4
    assert pi_exact(p, 1000) == 6


def test_zero_level_is_a_step():
    p = GrainParams(10, 30, 0)
    assert kappa_exact(p, 2) == 1 and pi_exact(p, 2) == 1
    assert kappa_exact(p, 0.5) == 0


@settings(max_examples=60, deadline=None)
@given(
    st.integers(2, 40),
    st.integers(1, 60),
    st.integers(1, 3),
    st.integers(0, 200_000),
)
def test_counts_match_brute_force(B, width, k, x):
    C = B + width
    p = GrainParams(B, C, k)
    kappa, pi = brute(B, C, k, x)
    assert kappa_exact(p, x) == kappa
    assert pi_exact(p, x) == pi


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 30), st.integers(5, 60), st.integers(1, 3), st.integers(1, 10**6))
def test_split_sums_add_up(B, width, k, x):
    p = GrainParams(B, B + width, k)
    upper, lower = kappa_split(p, x)
    assert upper + lower == kappa_exact(p, x)


def test_classify_case_boundaries():
    p = GrainParams(10, 30, 2)
    assert classify_case(p, 99).j == -1
    assert classify_case(p, 100).j == 0
    assert classify_case(p, 299).j == 0
    assert classify_case(p, 300).j == 1
    assert classify_case(p, 900).j == 2
    assert classify_case(p, 10**9).j == 2
    assert CaseIndex(1, 2).interval(p) == (300, 900)
    assert CaseIndex(2, 2).interval(p) == (900, math.inf)
    with pytest.raises(DomainError):
        CaseIndex(3, 2)


def test_grain_params_validation():
    with pytest.raises(DomainError):
        GrainParams(1, 10, 2)
    with pytest.raises(DomainError):
        GrainParams(10, 10, 2)
    with pytest.raises(DomainError):
        GrainParams(10, 20, -1)
    p = GrainParams.from_alpha(3000, 0.25, 3)
    assert p.C == 22202
    assert p.alpha == pytest.approx(0.2499973, abs=1e-7)
    assert p.x_of(p.xi_of(1e11)) == pytest.approx(1e11)
    assert p.with_k(2).k == 2
    assert p.boundary(1) == 3000**2 * 22202


def test_grain_primes_half_open():
    assert grain_primes(GrainParams(11, 29, 1)).tolist() == [13, 17, 19, 23, 29]


def test_node_budget():
    p = GrainParams(3000, 22202, 3)
    with pytest.raises(ResourceError):
        kappa_exact(p, 1e20, max_nodes=1000)


def test_desk_scale_value():
    p = GrainParams(3000, 22202, 3)
    assert kappa_exact(p, 3000**3 * 3) > 0
    # symmetric relation between ordered and unordered counts at C^3
    kappa = kappa_exact(p, 22202**3)
    n = len(grain_primes(p))
    assert kappa == n**3

from __future__ import annotations

import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coarsegrain.errors import DomainError
from coarsegrain.exact import GrainParams, kappa_exact, pi_exact
from coarsegrain.multiplicity import (
    Sorting,
    TypeVector,
    all_sortings,
    bell_asymptotic_ratio,
    compositions,
    increasing_representative,
    kappa_from_types,
    nonsquarefree_bound,
    ordered_bell,
    pi_from_types,
    sorting_count_brute,
    sorting_of,
    sortings_count,
    type_counts,
    type_of,
)


def test_ordered_bell_values():
    assert [ordered_bell(k) for k in range(8)] == [1, 1, 3, 13, 75, 541, 4683, 47293]


@pytest.mark.parametrize("k", range(1, 7))
def test_enumerated_sortings(k):
    sortings = list(all_sortings(k))
    assert len(sortings) == len(set(sortings)) == ordered_bell(k)
    assert sum(sortings_count(t) for t in compositions(k)) == ordered_bell(k)


def test_sorting_of_groups_by_value():
    s = sorting_of((7, 3, 7, 5))
    assert s.blocks == (frozenset({2}), frozenset({4}), frozenset({1, 3}))
    assert type_of(s) == TypeVector((1, 1, 2))
    assert increasing_representative(TypeVector((2, 1))) == sorting_of((3, 3, 5))


def test_invalid_sortings():
    with pytest.raises(DomainError):
        Sorting((frozenset({1}), frozenset({1, 2})))
    with pytest.raises(DomainError):
        Sorting((frozenset({1}), frozenset({3})))
    with pytest.raises(DomainError):
        TypeVector((1, 0))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=6), st.randoms())
def test_permutation_preserves_type(values, rnd):
    k = len(values)
    sigma = list(range(1, k + 1))
    rnd.shuffle(sigma)
    s = sorting_of(values)
    permuted = [None] * k
    for i, v in enumerate(values, start=1):
        permuted[sigma[i - 1] - 1] = v
    assert s.permuted(sigma) == sorting_of(permuted)
    assert type_of(s.permuted(sigma)) == type_of(s)


def test_type_counts_reproduce_both_counts():
    p = GrainParams(10, 60, 3)
    for x in (2000, 10**4, 5 * 10**4, 2 * 10**5):
        counts = type_counts(p, x)
        assert kappa_from_types(counts) == kappa_exact(p, x)
        assert pi_from_types(counts) == pi_exact(p, x)


def test_sorting_counts_depend_on_type_only():
    p = GrainParams(10, 40, 3)
    by_sorting = sorting_count_brute(p, 30000)
    by_type = type_counts(p, 30000)
    for s, n in by_sorting.items():
        assert n == by_type[type_of(s)]


def test_nonsquarefree_bound_on_small_instance():
    p = GrainParams(10, 60, 3)
    for x in range(1000, 216000, 997):
        diff = abs(pi_exact(p, x) - kappa_exact(p, x) / 6)
        bound = nonsquarefree_bound(3, x, 10)
        assert diff <= bound.tight <= bound.simple


def test_nonsquarefree_bound_needs_k2():
    with pytest.raises(DomainError):
        nonsquarefree_bound(1, 10, 10)


@pytest.mark.parametrize("k", range(8, 15))
def test_bell_asymptotics(k):
    assert 0.99 <= bell_asymptotic_ratio(k) <= 1.01


def test_compositions_are_all_types():
    assert {t.sizes for t in compositions(3)} == {(3,), (2, 1), (1, 2), (1, 1, 1)}
    assert sum(1 for _ in compositions(6)) == 2**5
    assert all(t.k == 5 for t in compositions(5))
    assert TypeVector((1, 1)).is_squarefree and not TypeVector((2,)).is_squarefree


def test_multinomial_matches_direct_enumeration():
    t = TypeVector((2, 1, 1))
    direct = sum(1 for s in all_sortings(4) if type_of(s) == t)
    assert sortings_count(t) == direct == math.factorial(4) // 2
    assert len(set(itertools.permutations((1, 1, 2, 3)))) == direct


def test_strict_order_fails_when_only_a_power_fits():
    # between p^2 and p * q (p, q the two smallest primes above B) only (p, p) counts
    p = GrainParams(3000, 22202, 2)
    x = 3001 * 3011 - 1
    assert kappa_exact(p, x) == pi_exact(p, x) == 1

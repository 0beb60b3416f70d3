"""Sortings, types and the non-squarefree correction.

A sorting of a k-tuple groups the positions by the rank of their value,
smallest value first. Its type is the sequence of block sizes. Tuples of
the same type are permutations of one another, which is what makes
k! pi and kappa differ only by tuples with repeated primes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

from .errors import DomainError
from .exact import GrainParams, _floor_int, grain_primes


@dataclass(frozen=True)
class TypeVector:
    """Block sizes of a sorting, in block order."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if not sizes or any(s < 1 for s in sizes):
            raise DomainError(f"type entries must be positive, got {sizes}")

    @property
    def k(self) -> int:
        return sum(self.sizes)

    @property
    def is_squarefree(self) -> bool:
        return all(s == 1 for s in self.sizes)


@dataclass(frozen=True)
class Sorting:
    """Ordered set partition of the positions {1, ..., k}."""

    blocks: tuple[frozenset[int], ...]

    def __post_init__(self):
        blocks = tuple(frozenset(b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if not blocks or any(not b for b in blocks):
            raise DomainError("sorting blocks must be non-empty")
        union = set().union(*blocks)
        if sum(len(b) for b in blocks) != len(union):
            raise DomainError("sorting blocks must be disjoint")
        if union != set(range(1, len(union) + 1)):
            raise DomainError("sorting blocks must cover 1..k")

    @property
    def k(self) -> int:
        return sum(len(b) for b in self.blocks)

    def permuted(self, sigma: Sequence[int]) -> "Sorting":
        """Image under the position map i -> sigma[i-1]."""
        return Sorting(tuple(frozenset(sigma[i - 1] for i in b) for b in self.blocks))

    def __repr__(self):
        inner = ", ".join("{" + ",".join(map(str, sorted(b))) + "}" for b in self.blocks)
        return f"Sorting({inner})"


def sorting_of(values: Sequence) -> Sorting:
    """Group the positions of ``values`` by equal value, ascending."""
    if len(values) == 0:
        raise DomainError("need a non-empty tuple")
    groups: dict = {}
    for pos, v in enumerate(values, start=1):
        groups.setdefault(v, []).append(pos)
    return Sorting(tuple(frozenset(groups[v]) for v in sorted(groups)))


def type_of(s: Sorting) -> TypeVector:
    return TypeVector(tuple(len(b) for b in s.blocks))


def sortings_count(t: TypeVector) -> int:
    """Multinomial k! / (T_1! ... T_r!): the number of sortings of type t."""
    out = math.factorial(t.k)
    for s in t.sizes:
        out //= math.factorial(s)
    return out


@lru_cache(maxsize=None)
def ordered_bell(k: int) -> int:
    """Number of ordered set partitions of k elements."""
    if k < 0:
        raise DomainError(f"k must be non-negative, got {k}")
    if k == 0:
        return 1
    return sum(math.comb(k, r) * ordered_bell(r) for r in range(k))


@dataclass(frozen=True)
class NonsquarefreeBound:
    tight: float
    simple: float


def nonsquarefree_bound(k: int, x: float, B: float) -> NonsquarefreeBound:
    """Bounds on |pi^k(x) - kappa^k(x)/k!|: tight and the 2^(k-1) x/B form."""
    if k < 2:
        raise DomainError(f"the correction applies for k >= 2, got {k}")
    if x < 0 or B <= 0:
        raise DomainError("need x >= 0 and B > 0")
    coeff = 2 ** (k - 1) - ordered_bell(k) / math.factorial(k)
    return NonsquarefreeBound(tight=coeff * x / B, simple=2 ** (k - 1) * x / B)


def increasing_representative(t: TypeVector) -> Sorting:
    """The sorting of type t whose tuples are non-decreasing."""
    blocks = []
    start = 1
    for size in t.sizes:
        blocks.append(frozenset(range(start, start + size)))
        start += size
    return Sorting(tuple(blocks))


def compositions(k: int) -> Iterator[TypeVector]:
    """All types for k elements (ordered compositions of k)."""
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    for cuts in itertools.product((False, True), repeat=k - 1):
        sizes, run = [], 1
        for c in cuts:
            if c:
                sizes.append(run)
                run = 1
            else:
                run += 1
        sizes.append(run)
        yield TypeVector(tuple(sizes))


def all_sortings(k: int) -> Iterator[Sorting]:
    """Every ordered set partition of {1, ..., k}."""

    def rec(rest: tuple[int, ...]):
        if not rest:
            yield ()
            return
        for r in range(1, len(rest) + 1):
            for first in itertools.combinations(rest, r):
                remaining = tuple(i for i in rest if i not in first)
                for tail in rec(remaining):
                    yield (frozenset(first),) + tail

    for blocks in rec(tuple(range(1, k + 1))):
        yield Sorting(blocks)


def type_counts(params: GrainParams, x) -> dict[TypeVector, int]:
    """#A_S(T)(x) for each type T, by enumerating non-decreasing tuples.

    Plain Python enumeration; meant for small instances.
    """
    k = params.k
    if k < 1:
        raise DomainError("type counts need k >= 1")
    n = _floor_int(x)
    P = grain_primes(params).tolist()
    counts = {t: 0 for t in compositions(k)}

    def walk(m, start, limit, prev, run, sizes):
        if m == 0:
            t = TypeVector(tuple(sizes + [run]) if run else tuple(sizes))
            counts[t] += 1
            return
        for i in range(start, len(P)):
            p = P[i]
            if p**m > limit:
                break
            if p == prev:
                walk(m - 1, i, limit // p, p, run + 1, sizes)
            else:
                walk(m - 1, i, limit // p, p, 1, sizes + [run] if run else sizes)

    walk(k, 0, n, None, 0, [])
    return counts


def sorting_count_brute(params: GrainParams, x) -> dict[Sorting, int]:
    """#A_S(x) for every sorting S, by enumerating all ordered tuples."""
    n = _floor_int(x)
    P = grain_primes(params).tolist()
    out: dict[Sorting, int] = {}
    for tup in itertools.product(P, repeat=params.k):
        if math.prod(tup) <= n:
            s = sorting_of(tup)
            out[s] = out.get(s, 0) + 1
    return out


def kappa_from_types(counts: dict[TypeVector, int]) -> int:
    return sum(sortings_count(t) * c for t, c in counts.items())


def pi_from_types(counts: dict[TypeVector, int]) -> int:
    return sum(counts.values())


def bell_asymptotic_ratio(k: int) -> float:
    """s(k) 2 ln^(k+1) 2 / k!, which tends to 1."""
    return ordered_bell(k) * 2.0 * math.log(2) ** (k + 1) / math.factorial(k)

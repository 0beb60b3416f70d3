"""Exact counting of ]B,C]-grained integers at desk scale.

``kappa_exact`` counts ordered k-tuples of primes in ]B, C] whose product is
at most x; ``pi_exact`` counts the distinct products instead. Both walk a
sorted prime list recursively with early termination and finish the last
two levels with vectorized binary searches. They are oracles for the
analytic estimates, not scalable algorithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, ResourceError
from .primes import primes_in

# Default ceiling on the estimated number of visited enumeration nodes.
MAX_NODES = 10**9


@dataclass(frozen=True)
class GrainParams:
    """The triple (B, C, k) with C = B^(1 + alpha).

    B and C may be integers (exact counting) or reals (estimates only).
    """

    B: float
    C: float
    k: int

    def __post_init__(self):
        if self.B < 2:
            raise DomainError(f"B must be at least 2, got {self.B!r}")
        if not self.C > self.B:
            raise DomainError(f"need C > B, got B={self.B!r}, C={self.C!r}")
        if int(self.k) != self.k or self.k < 0:
            raise DomainError(f"k must be a non-negative integer, got {self.k!r}")

    @classmethod
    def from_alpha(cls, B: int, alpha: float, k: int) -> "GrainParams":
        """Integer C = floor(B^(1+alpha)); the derived alpha moves slightly."""
        if alpha <= 0:
            raise DomainError(f"alpha must be positive, got {alpha!r}")
        C = math.floor(B ** (1.0 + alpha))
        return cls(B, C, k)

    @property
    def alpha(self) -> float:
        return math.log(self.C) / math.log(self.B) - 1.0

    @property
    def theta(self) -> float:
        return self.alpha * math.log(self.B)

    @property
    def is_integral(self) -> bool:
        return _is_int(self.B) and _is_int(self.C)

    def with_k(self, k: int) -> "GrainParams":
        return GrainParams(self.B, self.C, k)

    def xi_of(self, x: float) -> float:
        """Position of x on the scale x = B^(k + xi alpha)."""
        return (math.log(x) / math.log(self.B) - self.k) / self.alpha

    def x_of(self, xi: float) -> float:
        return self.B ** (self.k + xi * self.alpha)

    def boundary(self, j: int):
        """Lower end B^(k-j) C^j of case (k, j), exact for integer B, C."""
        if self.is_integral:
            return int(self.B) ** (self.k - j) * int(self.C) ** j
        return float(self.B) ** (self.k - j) * float(self.C) ** j


@dataclass(frozen=True)
class CaseIndex:
    """Case (k, j): x in [B^(k-j) C^j, B^(k-1-j) C^(j+1)[.

    j = -1 means x < B^k and j = k means x >= C^k.
    """

    j: int
    k: int

    def __post_init__(self):
        if not -1 <= self.j <= self.k:
            raise DomainError(f"case index {self.j} outside [-1, {self.k}]")

    def interval(self, params: GrainParams):
        lo = 0 if self.j < 0 else params.boundary(self.j)
        hi = math.inf if self.j >= self.k else params.boundary(self.j + 1)
        return lo, hi


def _is_int(v) -> bool:
    return isinstance(v, (int, np.integer)) or (
        isinstance(v, (float, Fraction)) and float(v).is_integer()
    )


def _comparable(params: GrainParams, x):
    """x in a form that compares exactly with the case boundaries."""
    if params.is_integral:
        if isinstance(x, (int, np.integer)):
            return int(x)
        if isinstance(x, Fraction):
            return math.floor(x)
        return math.floor(x) if math.isfinite(x) else x
    return float(x)


def classify_case(params: GrainParams, x) -> CaseIndex:
    """The unique j with x in case (k, j)."""
    if x < 0:
        raise DomainError(f"x must be non-negative, got {x!r}")
    xv = _comparable(params, x)
    j = -1
    for i in range(params.k + 1):
        if xv >= params.boundary(i):
            j = i
        else:
            break
    return CaseIndex(j, params.k)


def grain_primes(params: GrainParams) -> np.ndarray:
    """Sorted primes in ]B, C] as int64."""
    return primes_in(params.B, params.C).astype(np.int64)


def _floor_int(x) -> int:
    if x < 0:
        raise DomainError(f"x must be non-negative, got {x!r}")
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return math.floor(x)
    if not math.isfinite(x):
        raise DomainError(f"x must be finite, got {x!r}")
    return math.floor(x)


def estimate_nodes(primes: np.ndarray, k: int, n: int) -> int:
    """Rough upper bound for the number of leaves the enumeration visits."""
    if k <= 1 or len(primes) == 0:
        return 1
    p0 = int(primes[0])
    reach = n // p0 ** (k - 1) if p0 ** (k - 1) <= n else 0
    m = int(np.searchsorted(primes, reach, side="right"))
    return m ** (k - 1)


def _check_budget(primes, k, n, max_nodes):
    est = estimate_nodes(primes, k, n)
    if est > max_nodes:
        raise ResourceError(
            f"estimated {est:.3g} enumeration nodes exceeds the cap of {max_nodes:.3g}"
        )


def _kappa_count(P: np.ndarray, m: int, limit: int) -> int:
    # ordered m-tuples from P with product <= limit
    if m == 0:
        return 1 if limit >= 1 else 0
    if len(P) == 0 or limit < int(P[0]) ** m:
        return 0
    if m == 1:
        return int(np.searchsorted(P, limit, side="right"))
    if m == 2:
        top = int(np.searchsorted(P, limit // int(P[0]), side="right"))
        q = limit // P[:top]
        return int(np.searchsorted(P, q, side="right").sum())
    p0m = int(P[0]) ** (m - 1)
    total = 0
    for p in P.tolist():
        if p * p0m > limit:
            break
        total += _kappa_count(P, m - 1, limit // p)
    return total


def _pi_count(P: np.ndarray, m: int, limit: int, start: int) -> int:
    # non-decreasing m-tuples from P[start:] with product <= limit
    n = len(P)
    if m == 0:
        return 1 if limit >= 1 else 0
    if start >= n:
        return 0
    if m == 1:
        return max(0, int(np.searchsorted(P, limit, side="right")) - start)
    if m == 2:
        idx = np.arange(start, n)
        q = limit // P[start:]
        c = np.searchsorted(P, q, side="right") - idx
        return int(np.clip(c, 0, None).sum())
    total = 0
    for i in range(start, n):
        p = int(P[i])
        if p**m > limit:
            break
        total += _pi_count(P, m - 1, limit // p, i)
    return total


def kappa_exact(params: GrainParams, x, max_nodes: int = MAX_NODES, primes=None) -> int:
    """Number of ordered k-tuples of primes in ]B, C] with product <= x."""
    n = _floor_int(x)
    k = params.k
    if k == 0:
        return 1 if n >= 1 else 0
    P = grain_primes(params) if primes is None else primes
    _check_budget(P, k, n, max_nodes)
    return _kappa_count(P, k, n)


def pi_exact(params: GrainParams, x, max_nodes: int = MAX_NODES, primes=None) -> int:
    """Number of integers n <= x that are a product of k primes in ]B, C]."""
    n = _floor_int(x)
    k = params.k
    if k == 0:
        return 1 if n >= 1 else 0
    P = grain_primes(params) if primes is None else primes
    _check_budget(P, k, n, max_nodes)
    return _pi_count(P, k, n, 0)


def kappa_split(params: GrainParams, x, primes=None) -> tuple[int, int]:
    """The two partial sums of the first-prime decomposition of kappa.

    With y = x / (B^(k-1-j) C^j) for the case j of x, returns the
    contributions of first primes in ]y, C] and in ]B, y]. They add up to
    kappa_exact(params, x).
    """
    k = params.k
    if k < 1:
        raise DomainError("splitting needs k >= 1")
    n = _floor_int(x)
    P = grain_primes(params) if primes is None else primes
    case = classify_case(params, n)
    if case.j < 0:
        return 0, 0
    j = min(case.j, k - 1)
    div = params.boundary(j) // int(params.B)  # B^(k-1-j) C^j
    y = n // div
    cut = int(np.searchsorted(P, y, side="right"))
    upper = sum(_kappa_count(P, k - 1, n // p) for p in P[cut:].tolist())
    lower = sum(_kappa_count(P, k - 1, n // p) for p in P[:cut].tolist())
    return upper, lower

"""Exact positivity certificates for the right-end lower bound inequality.

The inequality, after substituting T = e^(-tau), is F_k(-ln T, T) >= 0 on
]0, 1]. Since F_k increases in tau, replacing -ln T by the truncated series
sum_{l<=s} (1-T)^l / l gives a univariate polynomial g_{k,s}(T) whose
positivity on ]0, 1[ implies the inequality. Positivity is certified with
a Sturm chain in exact arithmetic.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

from .errors import DomainError, ResourceError

MAX_S = 12


def _trim(c: Iterable) -> tuple:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class RationalPoly:
    """Univariate polynomial with exact rational coefficients, ascending."""

    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(Fraction(c) for c in self.coeffs))

    @classmethod
    def const(cls, c) -> "RationalPoly":
        return cls((Fraction(c),))

    @classmethod
    def monomial(cls, n: int, c=1) -> "RationalPoly":
        return cls((Fraction(0),) * n + (Fraction(c),))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __call__(self, t):
        acc = Fraction(0) if isinstance(t, (int, Fraction)) else 0.0
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return RationalPoly(tuple(x + y for x, y in zip(a, b)))

    __radd__ = __add__

    def __neg__(self):
        return RationalPoly(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        if self.is_zero or other.is_zero:
            return RationalPoly(())
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return RationalPoly(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = RationalPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def compose(self, inner: "RationalPoly") -> "RationalPoly":
        out = RationalPoly(())
        for c in reversed(self.coeffs):
            out = out * inner + c
        return out

    def divmod(self, other: "RationalPoly") -> tuple["RationalPoly", "RationalPoly"]:
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        q = [Fraction(0)] * max(0, len(rem) - other.degree)
        lead = other.lead()
        while len(rem) - 1 >= other.degree and rem:
            shift = len(rem) - 1 - other.degree
            f = rem[-1] / lead
            q[shift] = f
            for i, c in enumerate(other.coeffs):
                rem[shift + i] -= f * c
            rem = list(_trim(rem))
        return RationalPoly(tuple(q)), RationalPoly(tuple(rem))

    def derivative(self) -> "RationalPoly":
        return RationalPoly(tuple(i * c for i, c in enumerate(self.coeffs))[1:])

    def primitive_integer(self) -> tuple[int, ...]:
        """Integer coefficients of the primitive part (positive content)."""
        if self.is_zero:
            return ()
        den = reduce(math.lcm, (c.denominator for c in self.coeffs), 1)
        ints = [int(c * den) for c in self.coeffs]
        g = reduce(math.gcd, ints)
        return tuple(v // abs(g) for v in ints)


def _as_poly(v) -> RationalPoly:
    return v if isinstance(v, RationalPoly) else RationalPoly.const(v)


# --------------------------------------------------------------------------
# Building F_k and g_{k,s}


@dataclass(frozen=True)
class BivariatePoly:
    """Polynomial in (tau, T): ``coeffs[l]`` is the RationalPoly in T of tau^l."""

    coeffs: tuple[RationalPoly, ...]

    def coefficient(self, tau_deg: int, t_deg: int) -> Fraction:
        if tau_deg >= len(self.coeffs):
            return Fraction(0)
        c = self.coeffs[tau_deg].coeffs
        return c[t_deg] if t_deg < len(c) else Fraction(0)

    def __call__(self, tau, t):
        acc = Fraction(0) if isinstance(tau, (int, Fraction)) and isinstance(t, (int, Fraction)) else 0.0
        for p in reversed(self.coeffs):
            acc = acc * tau + p(t)
        return acc

    def substitute_tau(self, tau: RationalPoly) -> RationalPoly:
        out = RationalPoly(())
        for p in reversed(self.coeffs):
            out = out * tau + p
        return out


def q_poly(k: int) -> RationalPoly:
    """(1 - (1 - T)^k) / T as a polynomial."""
    return RationalPoly(tuple(Fraction(math.comb(k, i) * (-1) ** (i + 1)) for i in range(1, k + 1)))


def build_F(k: int) -> BivariatePoly:
    """F_k(tau, T) = sum_{l<=k-2} tau^l/l! - Q(T)(1 - tau^(k-1) T/(k-1)!)."""
    if k < 2:
        raise DomainError(f"F_k is defined for k >= 2, got {k}")
    Q = q_poly(k)
    coeffs = [RationalPoly(())] * k
    for ell in range(k - 1):
        coeffs[ell] = RationalPoly.const(Fraction(1, math.factorial(ell)))
    coeffs[0] = coeffs[0] - Q
    coeffs[k - 1] = Q * RationalPoly.monomial(1, Fraction(1, math.factorial(k - 1)))
    return BivariatePoly(tuple(coeffs))


def log_series(s: int) -> RationalPoly:
    """sum_{l=1..s} (1 - T)^l / l, a lower bound for -ln T on ]0, 1]."""
    one_minus = RationalPoly((Fraction(1), Fraction(-1)))
    out = RationalPoly(())
    power = RationalPoly.const(1)
    for ell in range(1, s + 1):
        power = power * one_minus
        out = out + power * Fraction(1, ell)
    return out


def build_g(k: int, s: int) -> RationalPoly:
    """g_{k,s}(T) = F_k(sum_{l<=s} (1-T)^l/l, T)."""
    if s < 1:
        raise DomainError(f"s must be positive, got {s}")
    return build_F(k).substitute_tau(log_series(s))


# --------------------------------------------------------------------------
# Sturm chains


def _int_prem(a: list[int], b: list[int]) -> list[int]:
    """Pseudo-remainder lc(b)^(deg a - deg b + 1) a mod b over the integers."""
    a = list(a)
    db = len(b) - 1
    lb = b[-1]
    delta = len(a) - 1 - db
    for _ in range(delta + 1):
        if len(a) - 1 < db:
            a = [c * lb for c in a]
            continue
        shift = len(a) - 1 - db
        la = a[-1]
        a = [c * lb for c in a]
        for i, c in enumerate(b):
            a[shift + i] -= la * c
        a = list(_trim(a))
    return a


def _primitive(a: list[int]) -> list[int]:
    if not a:
        return a
    g = reduce(math.gcd, a)
    return [c // abs(g) for c in a]


def sturm_chain(p: RationalPoly) -> list[tuple[int, ...]]:
    """Signed primitive remainder sequence of p and p'.

    Each member is rescaled by a positive factor only, so sign variations
    are the same as for the classical Sturm chain.
    """
    if p.is_zero:
        raise DomainError("the zero polynomial has no Sturm chain")
    a = list(p.primitive_integer())
    b = list(p.derivative().primitive_integer())
    chain = [tuple(a)]
    while b:
        chain.append(tuple(b))
        delta = len(a) - len(b)
        r = _int_prem(a, b)
        # prem multiplies a by lc(b)^(delta+1); undo its sign
        if b[-1] < 0 and (delta + 1) % 2 == 1:
            r = [-c for c in r]
        a, b = b, [-c for c in _primitive(r)]
    return chain


def _eval_int(c: Sequence[int], t: Fraction) -> Fraction:
    acc = Fraction(0)
    for v in reversed(c):
        acc = acc * t + v
    return acc


def _sign_changes(values: Iterable[Fraction]) -> int:
    signs = [v > 0 for v in values if v != 0]
    return sum(1 for x, y in zip(signs, signs[1:]) if x != y)


def sturm_root_count(p: RationalPoly, a, b) -> int:
    """Number of distinct real roots of p in ]a, b[."""
    a, b = Fraction(a), Fraction(b)
    if a >= b:
        raise DomainError("need a < b")
    if p(a) == 0 or p(b) == 0:
        raise DomainError("interval endpoints must not be roots")
    chain = sturm_chain(p)
    return _sign_changes(_eval_int(c, a) for c in chain) - _sign_changes(_eval_int(c, b) for c in chain)


def divide_out_root_at_one(p: RationalPoly) -> tuple[RationalPoly, int]:
    """Remove the full power of (1 - T) from p; returns (quotient, multiplicity)."""
    factor = RationalPoly((Fraction(1), Fraction(-1)))
    m = 0
    while not p.is_zero and p(Fraction(1)) == 0:
        p, r = p.divmod(factor)
        assert r.is_zero
        m += 1
    return p, m


def verify_positivity(k: int, s: int) -> bool:
    """g_{k,s}(0) > 0 and g_{k,s} has no zero on ]0, 1[."""
    if k < 3:
        raise DomainError(f"positivity check is for k >= 3, got {k}")
    g = build_g(k, s)
    if not g(Fraction(0)) > 0:
        return False
    # (1 - T)^m is positive on ]0, 1[, so only the cofactor can vanish there
    reduced, _ = divide_out_root_at_one(g)
    return sturm_root_count(reduced, 0, 1) == 0


def min_s(k: int, s_max: int = MAX_S) -> int:
    """Smallest s with verify_positivity(k, s)."""
    if not 3 <= k <= 9:
        raise DomainError(f"k outside the budgeted range 3..9: {k}")
    for s in range(1, s_max + 1):
        if verify_positivity(k, s):
            return s
    raise ResourceError(f"no s <= {s_max} certifies k = {k}")


@dataclass(frozen=True)
class SturmRow:
    k: int
    s: int
    degree: int
    seconds: float


def sturm_table(ks: Iterable[int], s_max: int = MAX_S) -> list[SturmRow]:
    rows = []
    for k in ks:
        t0 = time.perf_counter()
        s = min_s(k, s_max)
        rows.append(SturmRow(k, s, build_g(k, s).degree, time.perf_counter() - t0))
    return rows


def sturm_table_csv(rows: Sequence[SturmRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "min_s", "degree", "seconds"])
    for r in rows:
        w.writerow([r.k, r.s, r.degree, f"{r.seconds:.3f}"])
    return buf.getvalue()


def nested_g34_reduced() -> RationalPoly:
    """The hand-checkable nested form of g_{3,4}(T) / (1 - T)^3."""
    T = RationalPoly((Fraction(0), Fraction(1)))
    U = 1 - T
    F = Fraction
    inner = F(119, 144) * U**2 + F(89, 144) * T**2 + T * U * F(407, 288)
    mid = F(245, 96) * U + F(103, 24) * T + T * U * inner
    outer = F(481, 96) * U**2 + F(35, 24) * T**2 + T * U * mid
    return F(1, 12) * U + F(5, 6) * T + T * U * outer

"""Polynomial hills: the k-fold unit-window convolution of the unit box.

The hill of order k is the Irwin-Hall density (uniform cardinal B-spline)
supported on [0, k]. Hills are built exactly with rational coefficients by
repeatedly applying the window-mean operator (Mf)(xi) = int_{xi-1}^{xi} f.
Each piece is stored in its local coordinate t = xi - left_knot, which
keeps floating point evaluation free of cancellation.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import DomainError

Coeffs = tuple[Fraction, ...]


def _trim(c: Sequence[Fraction]) -> Coeffs:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _horner(c: Coeffs, t):
    acc = 0 * t
    for a in reversed(c):
        acc = acc * t + a
    return acc


def _shift(c: Coeffs, s: Fraction) -> Coeffs:
    """Coefficients of q(s + t) in t, given those of q."""
    out = [Fraction(0)] * len(c)
    for i, a in enumerate(c):
        if a == 0:
            continue
        for j in range(i + 1):
            out[j] += a * math.comb(i, j) * s ** (i - j)
    return _trim(out)


def _antiderivative(c: Coeffs) -> Coeffs:
    return _trim([Fraction(0)] + [a / (i + 1) for i, a in enumerate(c)])


def _derivative(c: Coeffs) -> Coeffs:
    return _trim([a * i for i, a in enumerate(c)][1:])


@dataclass(frozen=True)
class PiecewisePoly:
    """Piecewise polynomial on [knots[0], knots[-1]), zero outside.

    ``pieces[i]`` holds ascending coefficients in t = xi - knots[i] for the
    interval [knots[i], knots[i+1]). Evaluation is right-continuous.
    """

    knots: tuple[Fraction, ...]
    pieces: tuple[Coeffs, ...]

    def __post_init__(self):
        knots = tuple(Fraction(v) for v in self.knots)
        pieces = tuple(_trim(Fraction(a) for a in p) for p in self.pieces)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "pieces", pieces)
        if len(pieces) != len(knots) - 1:
            raise DomainError("need one piece per knot interval")
        if any(b <= a for a, b in zip(knots, knots[1:])):
            raise DomainError("knots must be strictly ascending")

    @property
    def degree(self) -> int:
        return max((len(p) - 1 for p in self.pieces), default=-1)

    def _locate(self, xi) -> int:
        """Index of the piece containing xi, or -1 outside the support."""
        if xi < self.knots[0] or xi >= self.knots[-1]:
            return -1
        return bisect.bisect_right(self.knots, xi) - 1

    def __call__(self, xi):
        """Exact for int/Fraction arguments, float otherwise."""
        exact = isinstance(xi, (int, Fraction))
        i = self._locate(Fraction(xi) if exact else xi)
        if i < 0:
            return Fraction(0) if exact else 0.0
        if exact:
            return _horner(self.pieces[i], Fraction(xi) - self.knots[i])
        t = float(xi) - float(self.knots[i])
        return float(np.polynomial.polynomial.polyval(t, [float(a) for a in self.pieces[i]] or [0.0]))

    def evaluate(self, xs) -> np.ndarray:
        """Vectorized float evaluation."""
        xs = np.asarray(xs, dtype=float)
        out = np.zeros_like(xs)
        for i, c in enumerate(self.pieces):
            a, b = float(self.knots[i]), float(self.knots[i + 1])
            mask = (xs >= a) & (xs < b)
            if c and mask.any():
                out[mask] = np.polynomial.polynomial.polyval(xs[mask] - a, [float(v) for v in c])
        return out

    def derivative(self, n: int = 1) -> "PiecewisePoly":
        pieces = self.pieces
        for _ in range(n):
            pieces = tuple(_derivative(p) for p in pieces)
        return PiecewisePoly(self.knots, pieces)

    def piece_integrals(self) -> list[Fraction]:
        out = []
        for i, c in enumerate(self.pieces):
            h = self.knots[i + 1] - self.knots[i]
            out.append(_horner(_antiderivative(c), h))
        return out

    def integral(self) -> Fraction:
        """Exact integral over the whole line."""
        return sum(self.piece_integrals(), Fraction(0))

    def primitive(self, xi: Fraction) -> Fraction:
        """Exact value of int_{-inf}^{xi} f."""
        xi = Fraction(xi)
        if xi <= self.knots[0]:
            return Fraction(0)
        full = self.piece_integrals()
        if xi >= self.knots[-1]:
            return sum(full, Fraction(0))
        i = self._locate(xi)
        return sum(full[:i], Fraction(0)) + _horner(_antiderivative(self.pieces[i]), xi - self.knots[i])

    def jumps(self) -> list[Fraction]:
        """Value jump f(k+) - f(k-) at each knot, zero extension outside."""
        out = []
        for i, k in enumerate(self.knots):
            right = _horner(self.pieces[i], Fraction(0)) if i < len(self.pieces) else Fraction(0)
            if i == 0:
                left = Fraction(0)
            else:
                left = _horner(self.pieces[i - 1], k - self.knots[i - 1])
            out.append(right - left)
        return out

    def mean(self) -> "PiecewisePoly":
        """Window mean (Mf)(xi) = int_{xi-1}^{xi} f, exactly."""
        knots = sorted(set(self.knots) | {k + 1 for k in self.knots})
        full = self.piece_integrals()

        def running(a: Fraction):
            # F(a + t) as a polynomial in t, valid while a + t stays in one piece
            i = self._locate(a)
            if i < 0:
                const = Fraction(0) if a < self.knots[0] else sum(full, Fraction(0))
                return (const,)
            const = sum(full[:i], Fraction(0))
            prim = _antiderivative(self.pieces[i])
            shifted = _shift(prim, a - self.knots[i])
            base = _horner(prim, Fraction(0))
            c = list(shifted) or [Fraction(0)]
            c[0] += const - base
            return tuple(c)

        pieces = []
        for a in knots[:-1]:
            hi, lo = running(a), running(a - 1)
            n = max(len(hi), len(lo))
            hi = list(hi) + [Fraction(0)] * (n - len(hi))
            lo = list(lo) + [Fraction(0)] * (n - len(lo))
            pieces.append(_trim(u - v for u, v in zip(hi, lo)))
        return PiecewisePoly(tuple(knots), tuple(pieces))


@lru_cache(maxsize=None)
def hill_build(k: int) -> PiecewisePoly:
    """The k-th polynomial hill on [0, k] with exact rational coefficients."""
    if k < 1:
        raise DomainError(f"hills start at k = 1, got {k}")
    if k == 1:
        return PiecewisePoly((0, 1), ((Fraction(1),),))
    return hill_build(k - 1).mean()


@lru_cache(maxsize=None)
def _hill_derivative(k: int, ell: int) -> PiecewisePoly:
    return hill_build(k).derivative(ell)


def hill_eval(k: int, ell: int, xi):
    """The ell-th derivative of the k-th hill at xi (right-continuous).

    Exact for int/Fraction xi, float otherwise.
    """
    if ell < 0:
        raise DomainError(f"derivative order must be non-negative, got {ell}")
    if ell >= k:
        raise DomainError(f"derivative order {ell} >= k = {k} is a distribution, not a function")
    return _hill_derivative(k, ell)(xi)


def hill_eval_explicit(k: int, ell: int, xi):
    """Closed-form sum over i <= floor(xi) of C(k,i)(-1)^i (xi-i)^(k-1-ell)/(k-1-ell)!.

    Valid on [0, k); the sum is taken literally, so it cancels heavily in
    floating point for large xi. Use Fractions for exact comparison.
    """
    if not 0 <= ell < k:
        raise DomainError(f"need 0 <= ell < k, got ell={ell}, k={k}")
    if xi < 0 or xi >= k:
        return Fraction(0) if isinstance(xi, (int, Fraction)) else 0.0
    d = k - 1 - ell
    total = sum(math.comb(k, i) * (-1) ** i * (xi - i) ** d for i in range(math.floor(xi) + 1))
    return total / math.factorial(d)


def mean_operator(f, xi, **quad_kw):
    """int_{xi-1}^{xi} f.

    Exact (rational) when f is a PiecewisePoly and xi is int/Fraction; for
    other callables uses adaptive quadrature.
    """
    if isinstance(f, PiecewisePoly):
        if isinstance(xi, (int, Fraction)):
            return f.primitive(Fraction(xi)) - f.primitive(Fraction(xi) - 1)
        return float(f.mean()(float(xi)))
    points = [p for p in range(math.floor(xi - 1), math.ceil(xi) + 1) if xi - 1 < p < xi]
    value, _ = integrate.quad(f, xi - 1, xi, points=points or None, **quad_kw)
    return value


def identity_rhs(k: int, xi):
    """(xi/(k-1)) m^(k-1)(xi) + ((k-xi)/(k-1)) m^(k-1)(xi-1)."""
    if k < 2:
        raise DomainError("the identity relates orders k and k-1 >= 1")
    prev = hill_build(k - 1)
    return (xi * prev(xi) + (k - xi) * prev(xi - 1)) / (k - 1)

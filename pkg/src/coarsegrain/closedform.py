"""Closed forms for the normalized estimates and the explicit constants.

On the scale x = B^(k + xi alpha) the kernel-1/ln B approximation of the
grained count, divided by alpha^k x, is the hill convolved with the decaying
exponential e^(-theta rho), theta = alpha ln B:

    lambda_norm(xi) = int_0^xi e^(-theta rho) m^k(xi - rho) d rho.

This module evaluates that function three ways (the cutexp sum, the
derivative sum, direct quadrature), the exponential-kernel variant
eta_norm with theta replaced by theta - ln(1 + alpha), the enclosure
factors relating the kernels, and the bound constants c_hat, c_tilde and
c_check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import mpmath
import numpy as np
from scipy import optimize

from .errors import DomainError
from .exact import GrainParams
from .hills import hill_build, hill_eval
from .primes import ErrorBoundMode, pnt_error_bound

Method = Literal["lambda", "nu", "eta"]


@dataclass(frozen=True)
class ShapeParams:
    """B, alpha and k for the normalized estimates (B may be real)."""

    B: float
    alpha: float
    k: int

    def __post_init__(self):
        if not self.B > 1:
            raise DomainError(f"B must exceed 1, got {self.B!r}")
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha!r}")
        if int(self.k) != self.k or self.k < 0:
            raise DomainError(f"k must be a non-negative integer, got {self.k!r}")
        if not self.theta_eta > 0:
            raise DomainError(
                f"alpha ln B must exceed ln(1 + alpha) (B={self.B!r}, alpha={self.alpha!r})"
            )

    @classmethod
    def from_grain(cls, params: GrainParams) -> "ShapeParams":
        return cls(float(params.B), params.alpha, params.k)

    @property
    def lnB(self) -> float:
        return math.log(self.B)

    @property
    def C(self) -> float:
        return self.B ** (1.0 + self.alpha)

    @property
    def theta(self) -> float:
        return self.alpha * math.log(self.B)

    @property
    def theta_eta(self) -> float:
        return self.alpha * math.log(self.B) - math.log1p(self.alpha)

    def with_k(self, k: int) -> "ShapeParams":
        return ShapeParams(self.B, self.alpha, k)

    def x_of(self, xi: float) -> float:
        return self.B ** (self.k + xi * self.alpha)

    def xi_of(self, x: float) -> float:
        return (math.log(x) / math.log(self.B) - self.k) / self.alpha


# --------------------------------------------------------------------------
# cutexp and the normalized lambda / eta


def _taylor_prefix(k: int, zeta: float) -> float:
    term, out = 1.0, []
    for ell in range(k):
        out.append(term)
        term *= zeta / (ell + 1)
    return math.fsum(out)


def cutexp(k: int, zeta: float) -> float:
    """exp(zeta) with the Taylor terms of degree < k removed."""
    if k < 0:
        raise DomainError(f"k must be non-negative, got {k}")
    if k == 0:
        return math.exp(zeta)
    if abs(zeta) < k:
        # direct tail series; term ratio zeta/(ell+1) < 1 from the start
        term = zeta**k / math.factorial(k)
        out = [term]
        ell = k
        while True:
            ell += 1
            term *= zeta / ell
            out.append(term)
            if abs(term) <= 1e-18 * abs(out[0]) or term == 0.0:
                break
        return math.fsum(out)
    return math.exp(zeta) - _taylor_prefix(k, zeta)


def cutexp_gamma(k: int, zeta: float) -> float:
    """cutexp through the regularized upper incomplete gamma function.

    exp(zeta) (1 - Gamma(k, zeta)/Gamma(k, 0)); an independent check path.
    Uses mpmath so negative arguments are allowed.
    """
    if k == 0:
        return math.exp(zeta)
    with mpmath.workdps(40):
        q = mpmath.gammainc(k, zeta, mpmath.inf, regularized=True)
        return float(mpmath.exp(zeta) * (1 - q))


def norm_cutexp_sum(k: int, theta: float, xi: float) -> float:
    """sum_{i <= floor(xi)} C(k,i) (-1)^i cutexp_k(-(xi-i) theta) / (-theta)^k.

    Terms with |zeta| < k use the tail series. For the others the Taylor
    prefix is summed exactly in rational arithmetic, since those prefixes
    cancel almost completely across i when theta xi is large.
    """
    if k < 0:
        raise DomainError(f"k must be non-negative, got {k}")
    if xi < 0:
        return 0.0
    if k == 0:
        return math.exp(-theta * xi)
    if xi >= k:
        # the full sum over i <= k collapses to the endpoint value
        return endpoint_value(k, theta) * math.exp(-theta * (xi - k))
    if xi >= k - 1:
        # complement of the full sum: only the i = k term is missing
        tau = (k - xi) * theta
        return endpoint_value(k, theta) * math.exp(tau) - cutexp(k, tau) / theta**k
    top = math.floor(xi)
    th, x = Fraction(theta), Fraction(xi)
    floats: list[float] = []
    exact = Fraction(0)
    for i in range(top + 1):
        c = math.comb(k, i) * (-1) ** i
        zeta = -(xi - i) * theta
        if abs(zeta) < k:
            floats.append(c * cutexp(k, zeta))
        else:
            floats.append(c * math.exp(zeta))
            z = -(x - i) * th
            term, prefix = Fraction(1), Fraction(0)
            for ell in range(k):
                prefix += term
                term = term * z / (ell + 1)
            exact -= c * prefix
    floats.append(float(exact))
    return math.fsum(floats) / (-theta) ** k


def norm_derivative_sum(k: int, theta: float, xi: float, dps: int = 60) -> float:
    """The derivative-sum form, evaluated with exact hill derivatives.

    (sum_i C(k,i)(-1)^i e^(-(xi-i) theta) - sum_ell (-theta)^ell D^(k-ell-1) m^k(xi)) / (-theta)^k.
    The two sums cancel to many digits, so this runs in extended precision.
    """
    if xi < 0:
        return 0.0
    if k == 0:
        return math.exp(-theta * xi)
    x = Fraction(xi)
    with mpmath.workdps(dps):
        th = mpmath.mpf(theta)
        xm = mpmath.mpf(x.numerator) / x.denominator
        top = min(math.floor(xi), k)
        s1 = mpmath.fsum(math.comb(k, i) * (-1) ** i * mpmath.exp(-(xm - i) * th) for i in range(top + 1))
        s2 = mpmath.fsum(
            (-th) ** ell * _mp_fraction(hill_eval(k, k - ell - 1, x)) for ell in range(k)
        )
        return float((s1 - s2) / (-th) ** k)


def _mp_fraction(q: Fraction):
    return mpmath.mpf(q.numerator) / q.denominator


def norm_integral(k: int, theta: float, xi: float, nodes: int = 40) -> float:
    """int_0^xi e^(-theta rho) m^k(xi - rho) d rho by Gauss-Legendre per hill piece."""
    if xi <= 0:
        return 0.0
    if k == 0:
        return math.exp(-theta * xi)
    hill = hill_build(k)
    # rho ranges where xi - rho stays inside one hill piece
    cuts = sorted({0.0, float(xi)} | {xi - j for j in range(k + 1) if 0 < xi - j < xi})
    t, w = np.polynomial.legendre.leggauss(nodes)
    parts = []
    for a, b in zip(cuts, cuts[1:]):
        rho = 0.5 * (b - a) * t + 0.5 * (a + b)
        vals = np.exp(-theta * rho) * hill.evaluate(xi - rho)
        parts.append(0.5 * (b - a) * float(np.dot(w, vals)))
    return math.fsum(parts)


def lambda_norm(sp: ShapeParams, xi: float) -> float:
    """Normalized kernel-1/ln B estimate, lambda^k / (alpha^k B^(k + xi alpha))."""
    return norm_cutexp_sum(sp.k, sp.theta, xi)


def lambda_tilde(sp: ShapeParams, xi: float) -> float:
    """Unnormalized lambda^k at x = B^(k + xi alpha)."""
    return sp.alpha**sp.k * sp.x_of(xi) * lambda_norm(sp, xi)


def eta_norm(sp: ShapeParams, xi: float) -> float:
    """Normalized exponential-kernel estimate (theta replaced by theta_eta)."""
    return norm_cutexp_sum(sp.k, sp.theta_eta, xi)


def eta_tilde(sp: ShapeParams, xi: float) -> float:
    """Unnormalized eta^k = alpha^k B^(k + xi alpha) (1 + alpha)^(-xi) eta_norm."""
    return sp.alpha**sp.k * sp.x_of(xi) * (1.0 + sp.alpha) ** (-xi) * eta_norm(sp, xi)


def endpoint_value(k: int, theta: float) -> float:
    """lambda_norm at xi = k: ((1 - e^(-theta)) / theta)^k."""
    return (-math.expm1(-theta) / theta) ** k


def xi_half(k: int, theta: float) -> float:
    """Location of the maximum of lambda_norm.

    The derivative is -theta lambda_norm + m^k, positive at k/2 and negative
    at k, so the root is bracketed there. For k = 1 the maximum is the kink
    at xi = 1.
    """
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    if k == 1:
        return 1.0
    hill = hill_build(k)

    def slope(xi):
        return -theta * norm_cutexp_sum(k, theta, xi) + hill(float(xi))

    lo, hi = k / 2.0, float(k)
    if slope(lo) <= 0:
        return lo
    return optimize.brentq(slope, lo, hi, xtol=1e-14, rtol=1e-14)


# --------------------------------------------------------------------------
# Bounds on lambda_norm


def upper_bound(theta: float) -> float:
    """lambda_norm <= 1 / theta for k >= 1."""
    return 1.0 / theta


def left_lower_bound(k: int, theta: float, xi: float) -> float:
    """exp(-ln^2 4 / theta) / theta * xi^k / k!, valid for k >= 2,
    theta >= ln 16 / k and xi in [0, 1]."""
    if k < 2 or theta < math.log(16) / k or not 0 <= xi <= 1:
        raise DomainError("left lower bound needs k >= 2, theta >= ln 16 / k, xi in [0, 1]")
    return math.exp(-math.log(4) ** 2 / theta) / theta * xi**k / math.factorial(k)


def left_cap(k: int, xi: float) -> float:
    """lambda_norm <= xi^k / k! on [0, 1]."""
    return xi**k / math.factorial(k)


def right_lower_bound(k: int, theta: float, xi: float) -> float:
    """((1 - e^(-theta))^k / theta) (k - xi)^(k-1) / (k-1)!, valid for k >= 3
    and xi in [k-1, k]."""
    if k < 3 or not k - 1 <= xi <= k:
        raise DomainError("right lower bound needs k >= 3 and xi in [k-1, k]")
    return (-math.expm1(-theta)) ** k / theta * (k - xi) ** (k - 1) / math.factorial(k - 1)


def lower_bound_hypothesis(k: int, theta: float, epsilon: float) -> bool:
    """Whether the c_check lower bound applies on [epsilon, k - epsilon].

    Needs theta >= max(ln 2, ln 16 / k), epsilon in ]0, 1], and either
    k < 3 or epsilon <= k - xi_half.
    """
    if not 0 < epsilon <= 1:
        return False
    if theta < max(math.log(2), math.log(16) / k):
        return False
    return k < 3 or epsilon <= k - xi_half(k, theta)


# --------------------------------------------------------------------------
# Kernel ratios and enclosure factors


def interval_factor(method: Method, alpha: float, k: int) -> float:
    """Lower end of [factor, 1] with kappa_tilde in [factor, 1] * estimate."""
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    if method == "lambda":
        base = 1.0 / (1.0 + alpha)
    elif method == "nu":
        base = (1.0 + alpha) / (1.0 + alpha / 2.0) ** 2
    elif method == "eta":
        l1 = math.log1p(alpha)
        base = l1 / alpha * (1.0 + alpha) ** (1.0 / l1 - 1.0 / alpha)
    else:
        raise DomainError(f"unknown method {method!r}")
    return base**k


def kernel_ratio_lambda(alpha: float, rho):
    """ln B / ln(B^(1 + rho alpha)) on rho in [0, 1]."""
    return 1.0 / (1.0 + alpha * np.asarray(rho, dtype=float))


def kernel_ratio_nu(alpha: float, rho):
    """(1/ln p) divided by the linear kernel (1-rho)/ln B + rho/ln C."""
    rho = np.asarray(rho, dtype=float)
    return (1.0 - rho + rho / (1.0 + alpha)) ** -1 / (1.0 + alpha * rho)


def kernel_ratio_eta(alpha: float, rho):
    """(1/ln p) divided by the exponential kernel (1+alpha)^(-rho)/ln B."""
    rho = np.asarray(rho, dtype=float)
    return (1.0 + alpha) ** rho / (1.0 + alpha * rho)


def eta_ratio_argmin(alpha: float) -> float:
    """Where kernel_ratio_eta is smallest: (alpha - ln(1+alpha)) / (alpha ln(1+alpha))."""
    l1 = math.log1p(alpha)
    return (alpha - l1) / (alpha * l1)


# --------------------------------------------------------------------------
# Bound constants


def c_tilde(k: int, B: float, alpha: float) -> float:
    """Upper bound of lambda_norm: 1 for k = 0, 1/(alpha ln B) otherwise."""
    return 1.0 if k == 0 else 1.0 / (alpha * math.log(B))


def dusart_u(B: float, alpha: float) -> float:
    """Per-level growth factor of c_hat in dusart mode.

    2 E(B)/(alpha B) plus the integration-by-parts bound of
    int_0^1 E'(B^(1+rho alpha)) ln B d rho, keeping the E(C)/(alpha C) term
    rather than neglecting it.
    """
    mode = ErrorBoundMode.DUSART
    C = B ** (1.0 + alpha)
    eB = float(pnt_error_bound(B, mode))
    eC = float(pnt_error_bound(C, mode))
    integral = eC / (alpha * C) - eB / (alpha * B) + math.log(B) * eB / B
    return 2.0 * eB / (alpha * B) + integral


def c_hat(k: int, B: float, alpha: float, mode: ErrorBoundMode | str = ErrorBoundMode.RIEMANN) -> float:
    """Bound c_hat_k >= lambda_hat_norm^k(xi) for all xi."""
    mode = ErrorBoundMode.parse(mode)
    if k < 0:
        raise DomainError(f"k must be non-negative, got {k}")
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    mode.require(B, "B")
    if k == 0:
        return 0.0
    lnB = math.log(B)
    sqB = math.sqrt(B)
    if mode is ErrorBoundMode.DUSART:
        u = dusart_u(B, alpha)
        c = 0.0
        for j in range(1, k + 1):
            c = c + u * (c_tilde(j - 1, B, alpha) + c)
        return c
    c1 = (2.0 + alpha) * lnB / (8.0 * math.pi * alpha * sqB)
    if k == 1:
        return c1
    step = (4.0 + 3.0 * lnB) / (8.0 * math.pi * alpha * sqB)
    c = (6.0 + 3.0 * alpha) / (8.0 * math.pi * alpha**2) / sqB + step * (c_tilde(1, B, alpha) + c1)
    for j in range(3, k + 1):
        c = c + step * (c_tilde(j - 1, B, alpha) + c)
    return c


def c_hat_2_expanded(B: float, alpha: float) -> float:
    """The fully expanded form of c_hat_2 in riemann mode."""
    lnB = math.log(B)
    sqB = math.sqrt(B)
    return (
        (9.0 + 3.0 * alpha) / (8.0 * math.pi * alpha**2) / sqB
        + 1.0 / (2.0 * math.pi * alpha**2 * sqB * lnB)
        + (2.0 + alpha) * (4.0 + 3.0 * lnB) * lnB / (64.0 * math.pi**2 * alpha**2 * B)
    )


def c_hat_bound(k: int, B: float, alpha: float) -> float:
    """(2^k - 1)(1 + alpha) / (alpha^2 sqrt B), the large-B bound on c_hat_k."""
    return (2**k - 1) * (1.0 + alpha) / (alpha**2 * math.sqrt(B))


def c_check(k: int, epsilon: float) -> float:
    """min(2^-4 eps^k / k!, 2^-k eps^(k-1) / (k-1)!)."""
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    if not 0 < epsilon <= 1:
        raise DomainError(f"epsilon must lie in ]0, 1], got {epsilon!r}")
    return min(
        2.0**-4 * epsilon**k / math.factorial(k),
        2.0**-k * epsilon ** (k - 1) / math.factorial(k - 1),
    )


def lambda_hat_norm_1(sp: ShapeParams, xi: float) -> float:
    """Exact normalized first-level error term in riemann mode."""
    ErrorBoundMode.RIEMANN.require(sp.B, "B")
    if xi < 0:
        return 0.0
    a, lnB, B = sp.alpha, sp.lnB, sp.B
    tail = lnB / (8.0 * math.pi * a) * B ** (-0.5 - xi * a)
    if xi < 1:
        return (1.0 + xi * a) * lnB / (8.0 * math.pi * a) * B ** (-(1.0 + xi * a) / 2.0) + tail
    return (1.0 + a) * lnB / (8.0 * math.pi * a) * B ** (-0.5 + a / 2.0 - xi * a) + tail

"""Direct numeric evaluation of the recursive estimates.

Everything runs on the scale x = B^(k + xi alpha) with integration variable
p = B^(1 + rho alpha). Dividing a level-k function F by x gives G = F/x,
and the recursions become one-dimensional convolutions over rho in [0, 1]:

    G~^k(xi) = alpha int_0^1 G~^(k-1)(xi - rho) w(rho) d rho
    G^^k(xi) = alpha int_0^1 G^^(k-1)(xi - rho) w(rho) d rho
             + (2 E(B) / B) (G~ + G^)^(k-1)(xi)
             + alpha ln B int_0^1 (G~ + G^)^(k-1)(xi - rho) E'(B^(1 + rho alpha)) d rho

with G~^0(xi) = e^(-theta xi) for xi >= 0 and G^^0 = 0. The kernel w is
1/(1 + rho alpha) for kappa, 1 for lambda, the linear interpolant for nu and
(1 + alpha)^(-rho) for eta. Only the first summand of the error recursion
carries the kernel.

A level-m function vanishes for xi < 0, is smooth on each [j, j+1] and
decays like e^(-theta (xi - m)) beyond xi = m, where the underlying count
saturates. Inner levels are stored as one Chebyshev interpolant per unit
piece; the outermost level is integrated directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Literal

import numpy as np
from numpy.polynomial import Chebyshev

from . import closedform
from .closedform import ShapeParams, c_check, c_hat, interval_factor
from .errors import AccuracyError, DomainError, ResourceError
from .exact import GrainParams, classify_case
from .primes import ErrorBoundMode, pnt_error_bound, pnt_error_bound_derivative

Kernel = Literal["kappa", "lambda", "nu", "eta"]
MAX_K = 4

_GL_LOW = np.polynomial.legendre.leggauss(20)
_GL_HIGH = np.polynomial.legendre.leggauss(40)
_CHEB_DEGREES = (16, 32, 64, 128)


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances for the nested quadrature.

    ``abs_tol`` applies to values divided by x, which are at most of order 1.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-15
    max_depth: int = 12
    split_at_case_boundaries: bool = True

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_depth < 1:
            raise DomainError(f"max_depth must be at least 1, got {self.max_depth}")

    def tighter(self, factor: float) -> "QuadratureConfig":
        return QuadratureConfig(
            self.rel_tol * factor, self.abs_tol, self.max_depth, self.split_at_case_boundaries
        )


DEFAULT_CONFIG = QuadratureConfig()


@dataclass(frozen=True)
class EstimateInterval:
    """Enclosure [lower, upper] of kappa(x) produced by one estimate."""

    lower: float
    upper: float
    method: str
    x: float

    def __post_init__(self):
        if not 0 <= self.lower <= self.upper:
            raise DomainError(f"invalid enclosure [{self.lower!r}, {self.upper!r}]")

    @property
    def center(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


@dataclass(frozen=True)
class MainBound:
    a_lo: float
    a_hi: float
    err: float


# --------------------------------------------------------------------------
# Kernels


def _kernel(name: str, alpha: float) -> Callable[[np.ndarray], np.ndarray]:
    if name == "kappa":
        return lambda r: 1.0 / (1.0 + alpha * r)
    if name == "lambda":
        return np.ones_like
    if name == "nu":
        return lambda r: (1.0 - r) + r / (1.0 + alpha)
    if name == "eta":
        la = math.log1p(alpha)
        return lambda r: np.exp(-la * r)
    raise DomainError(f"unknown kernel {name!r}")


# --------------------------------------------------------------------------
# Levels


@dataclass(frozen=True)
class _Level:
    """A level-m function of xi: Chebyshev pieces on [0, m], exponential tail."""

    m: int
    theta: float
    pieces: tuple[Chebyshev, ...]
    end: float

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for j, piece in enumerate(self.pieces):
            mask = (t >= j) & (t < j + 1)
            if mask.any():
                out[mask] = piece(t[mask])
        tail = t >= self.m
        if tail.any():
            out[tail] = self.end * np.exp(-self.theta * (t[tail] - self.m))
        return out


def _base_level(theta: float, value: float) -> _Level:
    return _Level(0, theta, (), value)


def _segments(xi: np.ndarray, split: bool) -> list[tuple[np.ndarray, np.ndarray]]:
    """rho intervals on which xi - rho stays inside one unit piece."""
    upper = np.clip(xi, 0.0, 1.0)
    if not split:
        return [(np.zeros_like(xi), upper)]
    s = np.clip(xi - np.floor(xi), 0.0, None)
    s = np.minimum(s, upper)
    return [(np.zeros_like(xi), s), (s, upper)]


def _gl(f, xi, a, b, cfg: QuadratureConfig, depth: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Adaptive Gauss-Legendre of f(xi, rho) over rho in [a, b], per xi."""
    half = 0.5 * (b - a)[:, None]
    mid = 0.5 * (a + b)[:, None]
    xcol = xi[:, None]
    t1, w1 = _GL_LOW
    t2, w2 = _GL_HIGH
    i1 = (f(xcol, mid + half * t1) * w1).sum(axis=1) * half[:, 0]
    i2 = (f(xcol, mid + half * t2) * w2).sum(axis=1) * half[:, 0]
    err = np.abs(i2 - i1)
    bad = err > np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(i2))
    if not bad.any():
        return i2, err
    if depth >= cfg.max_depth:
        worst = int(np.argmax(err))
        raise AccuracyError(
            f"quadrature tolerance not reached at depth {depth} (xi={xi[worst]!r})",
            estimate=float(i2[worst]),
            error=float(err[worst]),
        )
    c = 0.5 * (a[bad] + b[bad])
    l_val, l_err = _gl(f, xi[bad], a[bad], c, cfg, depth + 1)
    r_val, r_err = _gl(f, xi[bad], c, b[bad], cfg, depth + 1)
    i2 = i2.copy()
    err = err.copy()
    i2[bad] = l_val + r_val
    err[bad] = l_err + r_err
    return i2, err


def _convolve(f, xi: np.ndarray, cfg: QuadratureConfig) -> np.ndarray:
    """int_0^min(1, xi) f(xi, rho) d rho for xi >= 0, split at piece edges."""
    total = np.zeros_like(xi)
    for a, b in _segments(xi, cfg.split_at_case_boundaries):
        live = b > a
        if live.any():
            val, _ = _gl(f, xi[live], a[live], b[live], cfg)
            total[live] += val
    return total


@dataclass(frozen=True)
class _Recursion:
    """One step of the recursion, given the previous tilde and hat levels."""

    alpha: float
    lnB: float
    B: float
    kernel: Callable
    mode: ErrorBoundMode | None

    @property
    def theta(self) -> float:
        return self.alpha * self.lnB

    def tilde(self, prev: _Level, cfg: QuadratureConfig) -> Callable[[np.ndarray], np.ndarray]:
        a, w = self.alpha, self.kernel

        def g(xi):
            return a * _convolve(lambda x, r: prev(x - r) * w(r), xi, cfg)

        return g

    def hat(self, prev_t: _Level, prev_h: _Level, cfg: QuadratureConfig):
        a, w, lnB, B, mode = self.alpha, self.kernel, self.lnB, self.B, self.mode
        jump = 2.0 * pnt_error_bound(B, mode) / B

        def integrand(x, r):
            s = prev_t(x - r) + prev_h(x - r)
            dE = pnt_error_bound_derivative(np.exp(lnB * (1.0 + a * r)), mode)
            return prev_h(x - r) * w(r) + lnB * s * dE

        def g(xi):
            return a * _convolve(integrand, xi, cfg) + jump * (prev_t(xi) + prev_h(xi))

        return g


def _interpolate(g, m: int, theta: float, cfg: QuadratureConfig) -> _Level:
    pieces = []
    for j in range(m):
        for deg in _CHEB_DEGREES:
            cheb = Chebyshev.interpolate(g, deg, domain=[j, j + 1])
            c = np.abs(cheb.coef)
            scale = max(c.max(), cfg.abs_tol)
            if c[-3:].max() <= 0.1 * cfg.rel_tol * scale:
                break
        else:
            raise AccuracyError(
                f"Chebyshev interpolation of level {m} did not converge on [{j}, {j + 1}]",
                error=float(c[-3:].max() / scale),
            )
        pieces.append(cheb)
    end = float(g(np.array([float(m)]))[0])
    return _Level(m, theta, tuple(pieces), end)


@lru_cache(maxsize=64)
def _levels(
    B: float, alpha: float, kernel: str, mode: ErrorBoundMode | None, top: int, cfg: QuadratureConfig
) -> tuple[tuple[_Level, _Level | None], ...]:
    """Interpolated levels 0 .. top - 1 (the inputs of level ``top``)."""
    lnB = math.log(B)
    rec = _Recursion(alpha, lnB, B, _kernel(kernel, alpha), mode)
    inner = cfg.tighter(1e-2)
    t = _base_level(rec.theta, 1.0)
    h = _base_level(rec.theta, 0.0) if mode is not None else None
    out = [(t, h)]
    for m in range(1, top):
        t_next = _interpolate(rec.tilde(t, inner), m, rec.theta, cfg)
        if mode is not None:
            h = _interpolate(rec.hat(t, h, inner), m, rec.theta, cfg)
        t = t_next
        out.append((t, h))
    return tuple(out)


def _normalized(
    B: float,
    alpha: float,
    k: int,
    xi,
    kernel: str,
    mode: ErrorBoundMode | None,
    cfg: QuadratureConfig,
) -> np.ndarray:
    """G(xi) = F/x for the tilde (mode None) or hat function of level k."""
    if k > MAX_K:
        raise ResourceError(f"nested quadrature is capped at k = {MAX_K}; use the closed forms")
    if k < 0:
        raise DomainError(f"k must be non-negative, got {k}")
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    theta = alpha * math.log(B)
    if k == 0:
        if mode is not None:
            return np.zeros_like(xi)
        return np.where(xi >= 0, np.exp(-theta * np.maximum(xi, 0.0)), 0.0)
    rec = _Recursion(alpha, math.log(B), B, _kernel(kernel, alpha), mode)
    levels = _levels(float(B), float(alpha), kernel, mode, k, cfg)
    prev_t, prev_h = levels[-1]
    g = rec.tilde(prev_t, cfg) if mode is None else rec.hat(prev_t, prev_h, cfg)
    out = np.zeros_like(xi)
    inside = (xi >= 0) & (xi <= k)
    if inside.any():
        out[inside] = g(xi[inside])
    beyond = xi > k
    if beyond.any():
        end = g(np.array([float(k)]))[0]
        out[beyond] = end * np.exp(-theta * (xi[beyond] - k))
    return out


def _scalar(value: np.ndarray, like):
    return float(value[0]) if np.ndim(like) == 0 else value


# --------------------------------------------------------------------------
# Public API on the x scale


def _xi_grid(params: GrainParams, x) -> tuple[np.ndarray, np.ndarray]:
    """xi for each x, and a mask of x with a non-trivial value (x >= B^k)."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if (xs < 0).any():
        raise DomainError("x must be non-negative")
    active = np.array([classify_case(params, v).j >= 0 for v in xs], dtype=bool)
    xi = np.full_like(xs, -1.0)
    if active.any():
        # rounding can put x = B^k a hair below xi = 0
        xi[active] = np.maximum(
            (np.log(xs[active]) / math.log(params.B) - params.k) / params.alpha, 0.0
        )
    return xi, active


def _on_x(params: GrainParams, x, kernel: str, mode, cfg: QuadratureConfig):
    k = params.k
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if k == 0:
        if mode is not None:
            return _scalar(np.zeros_like(xs), x)
        return _scalar(np.where(xs >= 1, 1.0, 0.0), x)
    xi, active = _xi_grid(params, x)
    out = np.zeros_like(xs)
    if active.any():
        g = _normalized(float(params.B), params.alpha, k, xi[active], kernel, mode, cfg)
        out[active] = xs[active] * g
    return _scalar(out, x)


def kappa_tilde(params: GrainParams, x, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """The approximation kappa~^k(x) with kernel 1/ln p. Accepts arrays."""
    return _on_x(params, x, "kappa", None, cfg)


def kappa_hat(
    params: GrainParams,
    x,
    mode: ErrorBoundMode | str = ErrorBoundMode.RIEMANN,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
):
    """The error bound kappa^^k(x) with |kappa - kappa~| <= kappa^. Accepts arrays."""
    mode = ErrorBoundMode.parse(mode)
    mode.require(params.B, "B")
    return _on_x(params, x, "kappa", mode, cfg)


# --------------------------------------------------------------------------
# Public API on the xi scale


def _shape_value(sp: ShapeParams, k: int, xi, kernel: str, mode, cfg) -> np.ndarray:
    return _normalized(sp.B, sp.alpha, k, xi, kernel, mode, cfg)


def _x_factor(sp: ShapeParams, k: int, xi) -> np.ndarray:
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    return sp.B ** (k + xi * sp.alpha)


def lambda_tilde(sp: ShapeParams, k: int, xi, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """lambda~^k at x = B^(k + xi alpha) by quadrature of the xi recursion."""
    out = _x_factor(sp, k, xi) * _shape_value(sp, k, xi, "lambda", None, cfg)
    return _scalar(out, xi)


def lambda_hat(
    sp: ShapeParams,
    k: int,
    xi,
    mode: ErrorBoundMode | str = ErrorBoundMode.RIEMANN,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
):
    mode = ErrorBoundMode.parse(mode)
    mode.require(sp.B, "B")
    out = _x_factor(sp, k, xi) * _shape_value(sp, k, xi, "lambda", mode, cfg)
    return _scalar(out, xi)


def lambda_hat_norm(
    sp: ShapeParams,
    k: int,
    xi,
    mode: ErrorBoundMode | str = ErrorBoundMode.RIEMANN,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
):
    """lambda^^k / (alpha^k B^(k + xi alpha)), bounded by c_hat(k)."""
    mode = ErrorBoundMode.parse(mode)
    mode.require(sp.B, "B")
    out = _shape_value(sp, k, xi, "lambda", mode, cfg) / sp.alpha**k
    return _scalar(out, xi)


def nu_tilde(sp: ShapeParams, k: int, xi, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """nu~^k with the linear kernel (1-rho)/ln B + rho/ln C."""
    out = _x_factor(sp, k, xi) * _shape_value(sp, k, xi, "nu", None, cfg)
    return _scalar(out, xi)


def eta_tilde(sp: ShapeParams, k: int, xi, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """eta~^k with the exponential kernel (1+alpha)^(-rho)/ln B."""
    out = _x_factor(sp, k, xi) * _shape_value(sp, k, xi, "eta", None, cfg)
    return _scalar(out, xi)


# --------------------------------------------------------------------------
# Counting integers instead of tuples


def pi_tilde(params: GrainParams, x, cfg: QuadratureConfig = DEFAULT_CONFIG):
    return kappa_tilde(params, x, cfg) / math.factorial(params.k)


def pi_hat(
    params: GrainParams,
    x,
    mode: ErrorBoundMode | str = ErrorBoundMode.RIEMANN,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    exact_for_k1: bool = False,
):
    """kappa^/k! + 2^(k-1) x/B.

    With ``exact_for_k1`` the correction is dropped for k = 1, where
    products of one prime have no repeated factors to account for.
    """
    k = params.k
    base = kappa_hat(params, x, mode, cfg) / math.factorial(k)
    if k == 0 or (k == 1 and exact_for_k1):
        return base
    return base + 2.0 ** (k - 1) * np.asarray(x, dtype=float) / params.B


def main_bound(
    params: GrainParams,
    x: float,
    epsilon: float,
    mode: ErrorBoundMode | str = ErrorBoundMode.RIEMANN,
) -> MainBound:
    """Interval for a~ and radius err with |pi^k(x) - a~ x / ln B| <= err."""
    mode = ErrorBoundMode.parse(mode)
    k, B, C = params.k, float(params.B), float(params.C)
    alpha = params.alpha
    if k < 2:
        raise DomainError(f"the main bound needs k >= 2, got {k}")
    if not 0 < epsilon <= 1:
        raise DomainError(f"epsilon must lie in ]0, 1], got {epsilon!r}")
    if alpha < math.log(B) / math.sqrt(B):
        raise DomainError(f"alpha = {alpha:.6g} is below ln B / sqrt B")
    lo, hi = B**k * (1.0 + epsilon), C**k * (1.0 - epsilon)
    if not lo <= x <= hi:
        raise DomainError(f"x = {x!r} outside [{lo:.6g}, {hi:.6g}]")
    a_lo = alpha ** (k - 1) * c_check(k, epsilon) / (math.factorial(k) * (1.0 + alpha) ** k)
    a_hi = 1.0 / math.factorial(k)
    nonsquarefree = 2.0 ** (k - 1) * x / B
    if mode is ErrorBoundMode.RIEMANN:
        err = (2**k - 1) * alpha ** (k - 2) * (1.0 + alpha) * x / math.sqrt(B) + nonsquarefree
    else:
        err = alpha**k * c_hat(k, B, alpha, mode) * x + nonsquarefree
    return MainBound(a_lo, a_hi, float(err))


# --------------------------------------------------------------------------
# Enclosures of kappa(x)


def estimate_interval(
    params: GrainParams,
    x: float,
    method: str,
    mode: ErrorBoundMode | str = ErrorBoundMode.RIEMANN,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> EstimateInterval:
    """Enclosure of kappa(x) by the lambda, nu, eta or kappa estimate.

    Lower ends are clipped at zero.
    """
    mode = ErrorBoundMode.parse(mode)
    k = params.k
    if method == "kappa":
        t = kappa_tilde(params, x, cfg)
        h = kappa_hat(params, x, mode, cfg)
        return EstimateInterval(float(max(0.0, t - h)), float(t + h), method, float(x))
    if method not in ("lambda", "nu", "eta"):
        raise DomainError(f"unknown method {method!r}")
    if k < 1:
        raise DomainError("the kernel estimates need k >= 1")
    sp = ShapeParams.from_grain(params)
    alpha = sp.alpha
    xi = params.xi_of(x) if x > 0 else -math.inf
    if method == "lambda":
        central = closedform.lambda_tilde(sp, xi) if xi > -math.inf else 0.0
    elif method == "eta":
        central = closedform.eta_tilde(sp, xi) if xi > -math.inf else 0.0
    else:
        central = nu_tilde(sp, k, xi, cfg) if xi > -math.inf else 0.0
    slack = alpha**k * c_hat(k, sp.B, alpha, mode) * x
    lower = interval_factor(method, alpha, k) * central - slack
    return EstimateInterval(float(max(0.0, lower)), float(central + slack), method, float(x))

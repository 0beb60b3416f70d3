"""Prime tables, prime counting, the logarithmic integral and explicit
bounds on the prime number theorem error.

The sieve is a plain segmented Eratosthenes sieve over numpy boolean
segments. ``log_integral`` is the principal value of the integral of
1/ln t from 0 to x; two independent evaluations (a convergent series for
Ei(ln x) and an adaptive quadrature) are kept for cross-checking.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .errors import DomainError, ResourceError

SEGMENT_SIZE = 1 << 20
# Largest table (in entries) that sieve_range will materialize.
MAX_TABLE_ENTRIES = 600_000_000

RIEMANN_FLOOR = 2657
DUSART_FLOOR = 355_991
DUSART_CONSTANT = 2.3854


class ErrorBoundMode(str, enum.Enum):
    """Which explicit bound Ê(x) ≥ |π(x) − li(x)| is used.

    ``riemann`` is the conditional Schoenfeld bound sqrt(x) ln x / (8 pi),
    valid for x ≥ 2657. ``dusart`` is the unconditional 2.3854 x / ln^3 x,
    valid for x > 355991.
    """

    RIEMANN = "riemann"
    DUSART = "dusart"

    @property
    def floor(self) -> int:
        return RIEMANN_FLOOR if self is ErrorBoundMode.RIEMANN else DUSART_FLOOR

    def valid_at(self, x: float) -> bool:
        if self is ErrorBoundMode.RIEMANN:
            return x >= RIEMANN_FLOOR
        return x > DUSART_FLOOR

    def require(self, x: float, what: str = "argument") -> None:
        if not self.valid_at(x):
            op = ">=" if self is ErrorBoundMode.RIEMANN else ">"
            raise DomainError(
                f"{what} {x!r} below validity floor of {self.value} mode "
                f"(need {op} {self.floor})"
            )

    @classmethod
    def parse(cls, value: "ErrorBoundMode | str") -> "ErrorBoundMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown error bound mode {value!r}") from None


# --------------------------------------------------------------------------
# Sieve


@dataclass(frozen=True)
class PrimeTable:
    """Primality of every integer in [segment_lo, segment_hi].

    ``primality[i]`` is True iff ``segment_lo + i`` is prime.
    """

    segment_lo: int
    segment_hi: int
    primality: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.segment_lo > self.segment_hi:
            raise ValueError("segment_lo must not exceed segment_hi")
        if len(self.primality) != self.segment_hi - self.segment_lo + 1:
            raise ValueError("primality length does not match the range")
        self.primality.setflags(write=False)

    def __contains__(self, n: int) -> bool:
        return self.is_prime(n)

    def is_prime(self, n: int) -> bool:
        if not self.segment_lo <= n <= self.segment_hi:
            raise IndexError(f"{n} outside table range")
        return bool(self.primality[n - self.segment_lo])

    def primes(self) -> np.ndarray:
        """Sorted int64 array of the primes in the table."""
        return np.flatnonzero(self.primality).astype(np.int64) + self.segment_lo

    def count(self, x: float | None = None) -> int:
        """Number of primes p in the table with p ≤ x (all if x is None)."""
        if x is None:
            return int(np.count_nonzero(self.primality))
        top = math.floor(x)
        if top < self.segment_lo:
            return 0
        top = min(top, self.segment_hi)
        return int(np.count_nonzero(self.primality[: top - self.segment_lo + 1]))


def _small_primes(n: int) -> np.ndarray:
    """All primes ≤ n by a simple (non-segmented) sieve."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


def sieve_range(
    lo: int,
    hi: int,
    segment_size: int = SEGMENT_SIZE,
    max_entries: int = MAX_TABLE_ENTRIES,
) -> PrimeTable:
    """Segmented sieve of Eratosthenes over [lo, hi]."""
    lo, hi = int(lo), int(hi)
    if lo < 2 or lo > hi:
        raise DomainError(f"need 2 <= lo <= hi, got lo={lo}, hi={hi}")
    size = hi - lo + 1
    if size > max_entries:
        raise ResourceError(
            f"range of {size} entries exceeds the table budget of {max_entries}"
        )
    base = _small_primes(math.isqrt(hi))
    out = np.ones(size, dtype=bool)
    for seg_lo in range(lo, hi + 1, segment_size):
        seg_hi = min(seg_lo + segment_size - 1, hi)
        seg = out[seg_lo - lo : seg_hi - lo + 1]
        for p in base:
            p = int(p)
            if p * p > seg_hi:
                break
            start = max(p * p, -(-seg_lo // p) * p)
            seg[start - seg_lo :: p] = False
    return PrimeTable(lo, hi, out)


_cache: dict[str, np.ndarray | int] = {"limit": 1, "primes": np.zeros(0, dtype=np.int64)}


def primes_up_to(n: int) -> np.ndarray:
    """Sorted array of primes ≤ n, served from a growing module cache."""
    n = int(n)
    if n > _cache["limit"]:
        limit = max(n, 2 * int(_cache["limit"]), 1 << 16)
        _cache["primes"] = sieve_range(2, limit).primes()
        _cache["limit"] = limit
    primes = _cache["primes"]
    return primes[: np.searchsorted(primes, n, side="right")]


def primes_in(lo_exclusive: float, hi_inclusive: float) -> np.ndarray:
    """Sorted array of the primes in ]lo, hi]."""
    lo = math.floor(lo_exclusive)
    hi = math.floor(hi_inclusive)
    if hi < 2 or hi <= lo:
        return np.zeros(0, dtype=np.int64)
    if hi <= max(int(_cache["limit"]), 1 << 24):
        primes = primes_up_to(hi)
        return primes[np.searchsorted(primes, lo, side="right") :]
    return sieve_range(max(lo + 1, 2), hi).primes()


def prime_count(x: float) -> int:
    """π(x), the number of primes ≤ x."""
    if x < 0:
        raise DomainError("prime_count needs x >= 0")
    if x < 2:
        return 0
    return len(primes_up_to(math.floor(x)))


# --------------------------------------------------------------------------
# Logarithmic integral


def log_integral(x):
    """li(x), the principal value of ∫_0^x dt / ln t.

    Accepts scalars or numpy arrays. Evaluated as Ei(ln x).
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise DomainError("log_integral needs x >= 0")
    if np.any(arr == 1.0):
        raise DomainError("log_integral has a logarithmic singularity at x = 1")
    with np.errstate(divide="ignore"):
        out = np.where(arr == 0.0, 0.0, special.expi(np.log(np.where(arr == 0.0, 2.0, arr))))
    if np.ndim(x) == 0:
        return float(out)
    return out


def _ei_series(y: float) -> float:
    # Ramanujan's series; every term has the same sign for y < 0 and the
    # alternating tail is damped by exp(y/2) for y > 0.
    total = 0.0
    inner = 0.0
    term = 1.0
    n = 0
    while True:
        n += 1
        term *= y / n
        if (n - 1) % 2 == 0:
            inner += 1.0 / n
        piece = term / 2.0 ** (n - 1) * inner
        piece = piece if n % 2 == 1 else -piece
        total += piece
        if n > 2 * abs(y) + 10 and abs(piece) < 1e-18 * abs(total):
            break
    return np.euler_gamma + math.log(abs(y)) + math.exp(y / 2.0) * total


def li_series(x: float) -> float:
    """li(x) from the Ramanujan series for Ei(ln x)."""
    if x < 0:
        raise DomainError("li_series needs x >= 0")
    if x == 0:
        return 0.0
    if x == 1:
        raise DomainError("li has a logarithmic singularity at x = 1")
    return _ei_series(math.log(x))


def li_quadrature(x: float) -> float:
    """li(x) by adaptive quadrature.

    Uses Ei(y) = γ + ln|y| + ∫_0^y (e^s − 1)/s ds with y = ln x, which moves
    the principal-value singularity at t = 1 into the closed-form log term.
    """
    if x < 0:
        raise DomainError("li_quadrature needs x >= 0")
    if x == 0:
        return 0.0
    if x == 1:
        raise DomainError("li has a logarithmic singularity at x = 1")
    y = math.log(x)

    def f(s):
        return math.expm1(s) / s if s != 0.0 else 1.0

    val, _ = integrate.quad(f, 0.0, y, epsabs=0.0, epsrel=2e-14, limit=200)
    return np.euler_gamma + math.log(abs(y)) + val


# --------------------------------------------------------------------------
# Explicit error bounds


def pnt_error_bound(x, mode: ErrorBoundMode | str = ErrorBoundMode.RIEMANN):
    """Ê(x), the explicit bound on |π(x) − li(x)| of the given mode."""
    mode = ErrorBoundMode.parse(mode)
    arr = np.asarray(x, dtype=float)
    mode.require(float(np.min(arr)))
    lx = np.log(arr)
    if mode is ErrorBoundMode.RIEMANN:
        out = np.sqrt(arr) * lx / (8.0 * math.pi)
    else:
        out = DUSART_CONSTANT * arr / lx**3
    return float(out) if np.ndim(x) == 0 else out


def pnt_error_bound_derivative(x, mode: ErrorBoundMode | str = ErrorBoundMode.RIEMANN):
    """Ê'(x). Riemann: (ln x + 2)/(16 pi sqrt x); Dusart: 2.3854 (ln x − 3)/ln^4 x."""
    mode = ErrorBoundMode.parse(mode)
    arr = np.asarray(x, dtype=float)
    mode.require(float(np.min(arr)))
    lx = np.log(arr)
    if mode is ErrorBoundMode.RIEMANN:
        out = (lx + 2.0) / (16.0 * math.pi * np.sqrt(arr))
    else:
        out = DUSART_CONSTANT * (lx - 3.0) / lx**4
    return float(out) if np.ndim(x) == 0 else out


# --------------------------------------------------------------------------
# Verification of |π − li| < Ê


@dataclass
class PNTCheckpoint:
    x: int
    pi: int
    li: float
    bound: float

    @property
    def margin(self) -> float:
        return self.bound - abs(self.pi - self.li)

    @property
    def ok(self) -> bool:
        return self.margin > 0


@dataclass
class PNTReport:
    x_max: int
    mode: ErrorBoundMode
    checkpoints: list[PNTCheckpoint]
    primes_checked: int
    max_abs_diff: float
    max_ratio: float
    all_pass: bool

    def to_text(self) -> str:
        lines = [
            f"# verify_pnt x_max={self.x_max} mode={self.mode.value} "
            f"primes_checked={self.primes_checked}",
            f"# max|pi-li|={self.max_abs_diff:.6g} max|pi-li|/E={self.max_ratio:.6g} "
            f"all_pass={self.all_pass}",
            "x pi(x) li(x) bound margin",
        ]
        for c in self.checkpoints:
            lines.append(f"{c.x} {c.pi} {c.li:.10f} {c.bound:.10f} {c.margin:.10f}")
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps(
            {
                "x_max": self.x_max,
                "mode": self.mode.value,
                "primes_checked": self.primes_checked,
                "max_abs_diff": self.max_abs_diff,
                "max_ratio": self.max_ratio,
                "all_pass": self.all_pass,
                "checkpoints": [
                    {"x": c.x, "pi": c.pi, "li": c.li, "bound": c.bound, "margin": c.margin}
                    for c in self.checkpoints
                ],
            },
            indent=1,
        )


def verify_pnt(
    x_max: int,
    mode: ErrorBoundMode | str = ErrorBoundMode.RIEMANN,
    extra_checkpoints=(),
    max_entries: int = MAX_TABLE_ENTRIES,
) -> PNTReport:
    """Check |π(x) − li(x)| < Ê(x) for all real x in [floor, x_max].

    π is constant between consecutive primes while li increases, so the
    extremes of π − li sit at the primes themselves (from the right) and
    just below them (from the left). Both sides of every prime in range are
    checked, plus both ends of the range. The report lists the sparse
    checkpoints ⌊2^{j/8}⌋ and any caller-supplied values.
    """
    mode = ErrorBoundMode.parse(mode)
    x_max = int(x_max)
    start = mode.floor if mode is ErrorBoundMode.RIEMANN else mode.floor + 1
    if x_max < start:
        raise DomainError(f"x_max={x_max} below the {mode.value} validity floor {start}")
    if x_max + 1 > max_entries:
        raise ResourceError(f"x_max={x_max} exceeds the sieve budget of {max_entries}")

    table = sieve_range(2, x_max, max_entries=max_entries)
    primes = table.primes()
    lo_idx = np.searchsorted(primes, start, side="left")
    ps = primes[lo_idx:]
    pis = np.arange(lo_idx + 1, len(primes) + 1, dtype=np.int64)
    lis = log_integral(ps.astype(float))
    bounds = pnt_error_bound(ps.astype(float), mode)
    above = pis - lis  # right limit at p
    # The left limit at p probes x < p, which is only in range when p > start.
    below = (lis - (pis - 1))[ps > start]

    below_bounds = bounds[ps > start]
    diffs = [np.max(np.abs(above)) if len(ps) else 0.0, np.max(np.abs(below)) if len(below) else 0.0]
    ratios = [
        np.max(np.abs(above) / bounds) if len(ps) else 0.0,
        np.max(np.abs(below) / below_bounds) if len(below) else 0.0,
    ]
    all_pass = bool(np.all(above < bounds) and np.all(below < below_bounds))

    def checkpoint(x: int) -> PNTCheckpoint:
        return PNTCheckpoint(x, table.count(x), float(log_integral(float(x))), float(pnt_error_bound(float(x), mode)))

    for x in (start, x_max):
        c = checkpoint(x)
        diffs.append(abs(c.pi - c.li))
        ratios.append(abs(c.pi - c.li) / c.bound)
        all_pass &= c.ok

    xs = set()
    j = 0
    while True:
        x = math.floor(2.0 ** (j / 8.0))
        if x > x_max:
            break
        if x >= start:
            xs.add(x)
        j += 1
    xs.update(int(v) for v in extra_checkpoints if start <= v <= x_max)
    points = [checkpoint(x) for x in sorted(xs)]
    all_pass &= all(c.ok for c in points)

    return PNTReport(
        x_max=x_max,
        mode=mode,
        checkpoints=points,
        primes_checked=len(ps),
        max_abs_diff=float(max(diffs)),
        max_ratio=float(max(ratios)),
        all_pass=bool(all_pass),
    )

"""Counting and estimating integers whose k prime factors all lie in ]B, C]."""

from __future__ import annotations

from .errors import AccuracyError, DomainError, ResourceError
from .exact import GrainParams, kappa_exact, pi_exact
from .closedform import ShapeParams
from .integral import EstimateInterval, QuadratureConfig, estimate_interval
from .primes import ErrorBoundMode

__all__ = [
    "AccuracyError",
    "DomainError",
    "ErrorBoundMode",
    "EstimateInterval",
    "GrainParams",
    "QuadratureConfig",
    "ResourceError",
    "ShapeParams",
    "estimate_interval",
    "kappa_exact",
    "pi_exact",
]

__version__ = "0.1.0"

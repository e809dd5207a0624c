"""Closed-form off-diagonal bounds for the Bergman kernel norm.

All hyperbolic powers are formed in log space, so weights in the hundreds
and separations of tens of units stay finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaln

from .geometry import _logcosh, _logsinh

__all__ = [
    "BoundBreakdown",
    "ProofTermBounds",
    "GAMMA_VARIANTS",
    "wallis_ratio",
    "log_wallis_ratio",
    "c_constant",
    "rhs_compact",
    "log_rhs_compact",
    "noncompact_breakdown",
    "rhs_noncompact",
    "cusp_term",
    "wallis_term",
    "proof_term_bounds",
]

GAMMA_VARIANTS = ("derived", "printed")
_LOG_PI = math.log(math.pi)


def log_wallis_ratio(k: float) -> float:
    return 0.5 * _LOG_PI + float(gammaln(k - 0.5) - gammaln(k))


def wallis_ratio(k: float) -> float:
    """``int (1 + t^2)^-k dt`` over the real line, ``sqrt(pi) G(k-1/2) / G(k)``."""
    if not k > 0.5:
        raise ValueError("the integral converges only for k > 1/2")
    return math.exp(log_wallis_ratio(k))


def _check(k, delta, r):
    if int(k) != k or k < 3:
        raise ValueError(f"bounds need an integer k >= 3, got {k!r}")
    if not r > 0:
        raise ValueError("injectivity radius must be positive")
    if not delta >= r:
        raise ValueError(f"delta = {delta} must be at least r = {r}")
    return int(k), float(delta), float(r)


@dataclass(frozen=True)
class BoundBreakdown:
    """The four summands of the compact constant and, in the noncompact
    case, the cusp and stabiliser-string terms for given heights."""

    k: int
    delta: float
    r: float
    term1: float
    term2: float
    term3: float
    term4: float
    total: float
    log_total: float
    cusp_term: Optional[float] = None
    wallis_term: Optional[float] = None
    y: Optional[float] = None
    v: Optional[float] = None
    gamma_variant: Optional[str] = None
    log_terms: tuple = field(default=(), repr=False)

    @property
    def compact_total(self) -> float:
        return self.term1 + self.term2 + self.term3 + self.term4


def _log_terms(k, delta, r):
    lk = math.log(2 * k - 1)
    lch = float(_logcosh(delta / 2))
    s4 = float(_logsinh(r / 4))
    t1 = (lk + float(_logsinh(delta + r)) - math.log(4 * math.pi)
          - 2 * k * float(_logcosh((delta - r) / 2)) - float(_logsinh(r)))
    t2 = (lk + float(_logsinh(delta)) - math.log(2 * math.pi) - 2 * k * lch
          + float(_logcosh(r / 4)) - s4)
    t3 = (lk - math.log(2 * math.pi * (2 * k - 2)) - (2 * k - 2) * lch
          + math.log(2.0 + math.exp(-2 * s4)))
    t4 = lk - math.log(math.pi * (2 * k - 4)) - (2 * k - 4) * lch - 2 * s4
    return t1, t2, t3, t4


def c_constant(k: int, delta: float, r: float) -> BoundBreakdown:
    """The constant bounding the kernel norm on a compact surface."""
    k, delta, r = _check(k, delta, r)
    logs = _log_terms(k, delta, r)
    terms = [math.exp(t) for t in logs]
    return BoundBreakdown(k, delta, r, *terms, total=math.fsum(terms),
                          log_total=float(np.logaddexp.reduce(logs)), log_terms=logs)


def rhs_compact(k: int, delta: float, r: float) -> float:
    return c_constant(k, delta, r).total


def log_rhs_compact(k: int, delta: float, r: float) -> float:
    """``log rhs_compact`` without underflow at large ``k`` or ``delta``."""
    return c_constant(k, delta, r).log_total


def cusp_term(k: int, delta: float) -> float:
    """``(2k-1) / (4 pi cosh^2k(delta/2))``: the nearest stabiliser translate."""
    return math.exp(math.log((2 * k - 1) / (4 * math.pi)) - 2 * k * float(_logcosh(delta / 2)))


def wallis_term(k: int, y: float, v: float, gamma_variant: str = "derived") -> float:
    """The stabiliser-string term ``(2k-1) sqrt(y v) G(a) / (sqrt(pi) G(k))``.

    ``derived`` uses ``a = k - 1/2`` (the value of the integral);
    ``printed`` uses ``a = (k - 1)/2`` for comparison.
    """
    if gamma_variant not in GAMMA_VARIANTS:
        raise ValueError(f"gamma_variant must be one of {GAMMA_VARIANTS}")
    if not (y > 0 and v > 0):
        raise ValueError("heights must be positive")
    a = k - 0.5 if gamma_variant == "derived" else (k - 1) / 2
    return math.exp(math.log(2 * k - 1) + 0.5 * math.log(y * v) - 0.5 * _LOG_PI
                    + float(gammaln(a) - gammaln(k)))


def noncompact_breakdown(k: int, delta: float, r: float, y: float, v: float,
                         gamma_variant: str = "derived") -> BoundBreakdown:
    base = c_constant(k, delta, r)
    ct = cusp_term(base.k, base.delta)
    wt = wallis_term(base.k, y, v, gamma_variant)
    total = math.fsum([base.term1, base.term2, base.term3, base.term4, ct, wt])
    return BoundBreakdown(base.k, base.delta, base.r, base.term1, base.term2, base.term3,
                          base.term4, total, math.log(total), ct, wt, float(y), float(v),
                          gamma_variant, base.log_terms)


def rhs_noncompact(k: int, delta: float, r: float, y: float, v: float,
                   gamma_variant: str = "derived") -> float:
    """Bound for a surface with cusps at heights ``y`` and ``v``."""
    return noncompact_breakdown(k, delta, r, y, v, gamma_variant).total


@dataclass(frozen=True)
class ProofTermBounds:
    """Intermediate bounds: the ball of radius ``delta``, the integral
    beyond it, and the stabiliser string as a function of ``(y, v)``."""

    first: float
    integral: float
    parabolic: Callable[[float, float], float]


def proof_term_bounds(k: int, delta: float, r: float) -> ProofTermBounds:
    b = c_constant(k, delta, r)

    def parabolic(y: float, v: float) -> float:
        return cusp_term(b.k, b.delta) + wallis_term(b.k, y, v)

    return ProofTermBounds(b.term1, b.term3 + b.term4, parabolic)

"""Bergman kernel norms from the automorphic series, with certified tails.

For weight ``2k`` the hyperbolic norm of the kernel is

    ||B||(z, w) = (2k-1)/(4 pi) * | sum_g u_g^(2k) |,
    u_g = 2 sqrt(y v) / ((g z - conj w) j(g, z)),

summed over ``g`` in ``PSL(2, R)``, and ``|u_g| = 1 / cosh(d(g z, w) / 2)``.
The majorant replaces each term by its modulus.  Terms are handled through
``log u_g`` so that large ``k`` and large distances neither overflow nor
lose the phase.

Everything beyond the enumeration radius ``R`` is bounded by a lattice-point
tail estimate driven by the injectivity radius.  For groups with a cusp the
terms are grouped into cosets of the cusp stabiliser, and every coset that
meets the ball is summed along its whole horizontal string with its own
integral-comparison tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import betainc, betaln

from .fuchsian import (
    DEFAULT_MAX_ELEMENTS,
    FuchsianGroupSpec,
    enumerate_ball,
    horoheight,
    injectivity_radius,
    reduce_point,
)
from .geometry import UhpPoint, _apply, _log_cosh_half_dist, _logcosh, _logsinh, hyp_distance

__all__ = [
    "KernelEstimate",
    "TraceResult",
    "tail_bound",
    "log_tail_bound",
    "required_radius",
    "separation_radius",
    "parabolic_sum",
    "kernel_estimates",
    "kernel_norm",
    "majorant_sum",
    "kernel_trace",
    "dimension_oracle",
]

_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class KernelEstimate:
    """A value with a rigorous bound ``tail`` on everything left out.

    The true quantity lies in ``[value - tail, value + tail]`` whenever the
    enumeration behind it was complete.
    """

    value: float
    truncation_radius: float
    tail: float
    relative_error: float
    certified: bool
    k: int
    n_terms: int

    @property
    def upper(self) -> float:
        return self.value + self.tail

    @property
    def lower(self) -> float:
        return max(self.value - self.tail, 0.0)


def _rel(value, tail):
    return tail / (value - tail) if value > tail else math.inf


def _check_k(k):
    if int(k) != k or k < 2:
        raise ValueError(f"weight index k must be an integer >= 2, got {k!r}")
    return int(k)


# -- scalar helpers in log space -------------------------------------------

def _log_betainc_upper(a, b, x):
    """log of the regularised incomplete beta ``I_x(a, b)``, never below it.

    Where the library value underflows the bound
    ``x^a (1-x)^min(b-1, 0) / (a B(a, b))`` is used instead.
    """
    x = np.asarray(x, dtype=float)
    v = betainc(a, b, x)
    with np.errstate(divide="ignore"):
        exact = np.log(np.maximum(v, 1e-300))
        bound = a * np.log(x) + min(b - 1.0, 0.0) * np.log1p(-x) - math.log(a) - float(betaln(a, b))
    out = np.where(v > 1e-280, exact, bound)
    return float(out) if out.ndim == 0 else out


def _log_J(n, R):
    """log of the integral of (1 - t^2)^n over [tanh(R/2), 1]."""
    x = 1.0 / (math.exp(R) + 1.0) if R < 700 else math.exp(-R)
    if n == 0:
        return _LOG2 + math.log(x)
    return (2 * n + 1) * _LOG2 + float(betaln(n + 1, n + 1)) + _log_betainc_upper(n + 1, n + 1, x)


def log_tail_bound(r: float, R: float, k: int) -> float:
    """Natural log of :func:`tail_bound`."""
    k = _check_k(k)
    if not r > 0:
        raise ValueError("injectivity radius must be positive")
    if not R > r / 2:
        raise ValueError("truncation radius must exceed r/2")
    boundary = (-2 * k * float(_logcosh(R / 2)) + math.log(2 * math.cosh(r / 4))
                + float(_logsinh(R)) - math.log(math.sinh(r / 4)))
    # int_R^oo cosh^-2k(p/2) sinh(p + r/2) dp, split by the addition formula
    part_a = (math.log(math.cosh(r / 2)) + 2 * _LOG2
              + (2 - 2 * k) * float(_logcosh(R / 2)) - math.log(2 * k - 2))
    j0, j1 = _log_J(k - 2, R), _log_J(k - 1, R)
    part_b = math.log(math.sinh(r / 2)) + j0 + math.log(4.0 - 2.0 * math.exp(j1 - j0))
    integral = np.logaddexp(part_a, part_b) - math.log(2 * math.sinh(r / 4) ** 2)
    return float(np.logaddexp(boundary, integral))


def tail_bound(r: float, R: float, k: int) -> float:
    """Bound on the sum of ``cosh^-2k(d/2)`` over orbit points with ``d > R``.

    ``f(R) 2 cosh(r/4) sinh(R) / sinh(r/4) + (1 / (2 sinh^2(r/4)))
    * int_R^oo f(p) sinh(p + r/2) dp`` with ``f(p) = cosh^-2k(p/2)``; the
    integral is evaluated in closed form through incomplete beta functions.
    Multiply by ``(2k-1)/(4 pi)`` for the kernel normalisation.
    """
    return math.exp(log_tail_bound(r, R, k))


def required_radius(r: float, k: int, target: float, R_min: float = 0.0,
                    R_max: float = 200.0) -> float:
    """Smallest ``R`` (to 1e-6) with ``tail_bound(r, R, k) <= target``."""
    if not target > 0:
        raise ValueError("target must be positive")
    lt = math.log(target)
    lo = max(R_min, r / 2 * (1 + 1e-9) + 1e-12)
    if log_tail_bound(r, lo, k) <= lt:
        return lo
    hi = max(2 * lo, 4.0)
    while log_tail_bound(r, hi, k) > lt:
        hi *= 2
        if hi > R_max:
            return math.inf
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        if log_tail_bound(r, mid, k) > lt:
            lo = mid
        else:
            hi = mid
    return hi


def separation_radius(G: FuchsianGroupSpec, z: UhpPoint, w: UhpPoint,
                      r: Optional[float] = None) -> float:
    """Displacement lower bound valid for the orbits of ``z`` and ``w``.

    Starts from the injectivity radius (or ``r``) and shrinks it when a
    point sits higher in a cusp than the truncation height it was computed
    for.
    """
    if r is None:
        r = injectivity_radius(G).value
    if G.cusp is not None and G.cusp_scalings:
        h = max(horoheight(G, z), horoheight(G, w))
        r = min(r, 2.0 * math.asinh(1.0 / (2.0 * h)))
    return float(r)


# -- the cusp string -------------------------------------------------------

def _log_string_tail(s, N, k):
    """log of sum over |n| > N of ((t + n)^2 + s^2)^-k for any |t| <= 1/2."""
    s = np.asarray(s, dtype=float)
    a = (np.asarray(N) - 0.5) / s
    out = ((1 - 2 * k) * np.log(s) + float(betaln(k - 0.5, 0.5))
           + _log_betainc_upper(k - 0.5, 0.5, 1.0 / (1.0 + a * a)))
    return float(out) if np.ndim(out) == 0 else out


def _string_length(log_scale, k, log_target):
    """Half-length ``N`` with the omitted part of a string below the target.

    Uses ``sum_{|n|>N} |t + n|^-2k <= 2 (N - 1/2)^(1-2k) / (2k - 1)``.
    """
    e = (_LOG2 + log_scale - math.log(2 * k - 1) - log_target) / (2 * k - 1)
    n = 0.5 + np.exp(np.minimum(e, 30.0))
    return np.maximum(np.ceil(n), 1).astype(np.int64)


def parabolic_sum(z: UhpPoint, w: UhpPoint, k: int, h: float = 1.0,
                  tol: float = 1e-12) -> KernelEstimate:
    """``sum_n (4 y v)^k / ((x + h n - u)^2 + (y + v)^2)^k`` over all integers.

    No ``(2k-1)/(4 pi)`` factor is applied.  ``truncation_radius`` is a lower
    bound on ``d(z + h n, w)`` over the omitted translates.
    """
    k = _check_k(k)
    if not h > 0:
        raise ValueError("width must be positive")
    t = (z.x - w.x) / h
    t -= round(t)
    s = (z.y + w.y) / h
    logscale = k * math.log(4 * z.y * w.y) - 2 * k * math.log(h)
    N = max(int(math.ceil(s)), 1)
    while True:
        n = np.arange(-N, N + 1)
        logt = -k * np.log((t + n) ** 2 + s * s)
        m = logt.max()
        value = math.exp(logscale + m) * float(np.sum(np.exp(logt - m)))
        tail = math.exp(logscale + _log_string_tail(s, N, k))
        if tail <= tol * value or N > 10 ** 7:
            break
        N *= 2
    radius = 2.0 * math.asinh(math.hypot((N - 0.5) * h, z.y - w.y) / (2.0 * math.sqrt(z.y * w.y)))
    return KernelEstimate(value, radius, tail, _rel(value, tail), tail <= tol * value, k, n.size)


# -- series evaluation -----------------------------------------------------

def _element_logs(mats, z, w):
    """``log u_g`` for a stack of group elements."""
    gx, gy = _apply(mats, z.x, z.y)
    j = mats[:, 2] * complex(z.x, z.y) + mats[:, 3]
    tau = (gx - w.x) + 1j * (gy + w.y)
    lu = math.log(2.0) + 0.5 * math.log(z.y * w.y) - np.log(tau * j)
    # replace the modulus by the accurately computed -log cosh(d/2)
    return -_log_cosh_half_dist(gx, gy, w.x, w.y) + 1j * lu.imag


def _sum_logs(lu, ks):
    """Per ``k``: log of the majorant sum, complex signed sum, both scaled.

    Returns ``(m, signed, absolute)`` with the true sums equal to
    ``exp(m) * signed`` and ``exp(m) * absolute``.
    """
    out = []
    for k in ks:
        e = 2 * k * lu
        m = float(e.real.max()) if e.size else -math.inf
        if not math.isfinite(m):
            out.append((m, 0j, 0.0))
            continue
        mag = np.exp(e.real - m)
        signed = complex(np.sum(mag * np.cos(e.imag)), np.sum(mag * np.sin(e.imag)))
        out.append((m, signed, float(np.sum(mag))))
    return out


def _coset_data(G, mats, z, w):
    """Representatives of the cusp-stabiliser cosets met by ``mats``.

    Returns, per coset, the offset ``t`` of ``g z - conj w`` reduced to
    ``|Re| <= 1/2`` in width units, its imaginary part ``s``, the log of
    ``2 sqrt(y v) / (j h)`` and ``log(4 v Im g z / h^2)``.
    """
    h = G.cusp.width
    c, d = mats[:, 2], mats[:, 3]
    if G.integral:
        cd = np.stack([np.rint(c), np.rint(d)], axis=1).astype(np.int64)
    else:
        cd = np.round(np.stack([c, d], axis=1), 9)
    flip = (cd[:, 0] < 0) | ((cd[:, 0] == 0) & (cd[:, 1] < 0))
    cd[flip] *= -1
    _, first = np.unique(cd, axis=0, return_index=True)
    reps = mats[np.sort(first)]
    gx, gy = _apply(reps, z.x, z.y)
    jz = reps[:, 2] * complex(z.x, z.y) + reps[:, 3]
    t = (gx - w.x) / h
    t -= np.round(t)
    s = (gy + w.y) / h
    base = _LOG2 + 0.5 * math.log(z.y * w.y) - np.log(jz * h)
    log_scale = np.log(4.0 * gy * w.y) - 2.0 * math.log(h)
    return t, s, base, log_scale


def _string_logs(t, s, N, base):
    nmax = int(N.max())
    n = np.arange(-nmax, nmax + 1)
    live = np.abs(n)[None, :] <= N[:, None]
    sigma = (t[:, None] + n[None, :]) + 1j * s[:, None]
    return (base[:, None] - np.log(sigma))[live]


def _combine(parts):
    ms = np.array([p[0] for p in parts])
    m = float(ms.max())
    if not math.isfinite(m):
        return m, 0j, 0.0
    fac = np.exp(ms - m)
    signed = complex(sum(f * p[1] for f, p in zip(fac, parts)))
    absolute = float(sum(f * p[2] for f, p in zip(fac, parts)))
    return m, signed, absolute


def _evaluate(G, z, w, ks, R, eps, max_elements):
    """Truncated sums for each ``k`` at radius ``R``.

    Returns a list of ``(log_m, signed, absolute, log_string_tail)`` plus the
    completeness flag and the number of terms.  Cusp strings are cut so that
    together they omit at most ``eps`` times the largest single term.
    """
    if G.generators:
        ball = enumerate_ball(G, z, w, R, max_elements)
        mats, complete = ball.matrices, ball.complete
    else:
        keep = hyp_distance(z, w) <= R
        mats, complete = np.array([[1.0, 0.0, 0.0, 1.0]])[:int(keep)], True
    if G.cusp is None or mats.shape[0] == 0:
        lu = _element_logs(mats, z, w)
        sums = _sum_logs(lu, ks)
        return [(m, sg, ab, -math.inf) for m, sg, ab in sums], complete, lu.size
    t, s, base, log_scale = _coset_data(G, mats, z, w)
    lch_min = float(np.min(_logcosh(ball.distances / 2)))
    log_eps = math.log(eps) - math.log(t.size)
    N = np.ones(t.size, dtype=np.int64)
    for k in ks:
        N = np.maximum(N, _string_length(k * log_scale, k, log_eps - 2 * k * lch_min))
    order = np.argsort(N, kind="stable")
    t, s, N, base, log_scale = t[order], s[order], N[order], base[order], log_scale[order]
    parts = [[] for _ in ks]
    n_terms = 0
    lo = 0
    while lo < N.size:
        # rows of similar length, capped so the padded block stays small
        cap = 2 * int(N[lo])
        hi = int(np.searchsorted(N, cap, side="right"))
        hi = min(hi, lo + max(1, 2_000_000 // (2 * cap + 1)))
        lu = _string_logs(t[lo:hi], s[lo:hi], N[lo:hi], base[lo:hi])
        n_terms += lu.size
        for i, res in enumerate(_sum_logs(lu, ks)):
            parts[i].append(res)
        lo = hi
    out = []
    for i, k in enumerate(ks):
        m, signed, absolute = _combine(parts[i])
        lt = k * log_scale + _log_string_tail(s, N, k)
        out.append((m, signed, absolute, float(np.logaddexp.reduce(lt))))
    return out, complete, n_terms


def kernel_estimates(G: FuchsianGroupSpec, z: UhpPoint, w: UhpPoint, ks: Sequence[int],
                     tol: float = 1e-6, *, radius: Optional[float] = None,
                     r: Optional[float] = None, max_radius: float = 40.0,
                     max_elements: int = DEFAULT_MAX_ELEMENTS) -> dict:
    """Kernel norm and majorant for several weights from one enumeration.

    Returns ``{k: (norm, majorant)}`` of :class:`KernelEstimate`.  With
    ``radius=None`` the radius grows until every tail is within ``tol`` of
    the majorant; a fixed ``radius`` skips the search.  The norm's
    ``certified`` flag measures its tail against the majorant, since the
    signed sum can cancel far below its own truncation error.
    """
    ks = sorted({_check_k(k) for k in ks})
    if not ks:
        return {}
    if not tol > 0:
        raise ValueError("tol must be positive")
    if G.generators:
        z, _ = reduce_point(G, z)
        w, _ = reduce_point(G, w)
        r_sep = separation_radius(G, z, w, r)
    else:
        r_sep = math.inf
    eps = 0.005 * tol / (1.0 + tol)
    budget = 0.99 * tol / (1.0 + tol)
    log_c = {k: math.log((2 * k - 1) / (4 * math.pi)) for k in ks}

    def tails(R):
        if not math.isfinite(r_sep):
            return {k: -math.inf for k in ks}
        return {k: log_c[k] + log_tail_bound(r_sep, R, k) for k in ks}

    floor = r_sep / 2 * (1 + 1e-6) if math.isfinite(r_sep) else 0.0
    d0 = hyp_distance(z, w)
    if radius is not None:
        R = max(float(radius), floor)
        res, complete, n_terms = _evaluate(G, z, w, ks, R, eps, max_elements)
    else:
        # a partial sum is a lower bound on the majorant and fixes the radius
        R = max(min(d0 + 3.0, max_radius), floor)
        res, complete, n_terms = _evaluate(G, z, w, ks, R, eps, max_elements)
        if math.isfinite(r_sep):
            need = R
            for k, (m, _, ab, _) in zip(ks, res):
                target = math.exp(log_c[k] + m) * ab * budget
                need = max(need, required_radius(r_sep, k, target, R_min=floor))
            if need > R:
                R = min(need, max_radius)
                res, complete, n_terms = _evaluate(G, z, w, ks, R, eps, max_elements)
    lt = tails(R)
    out = {}
    for k, (m, signed, absolute, lst) in zip(ks, res):
        scale = log_c[k] + m
        maj = math.exp(scale) * absolute if absolute > 0 else 0.0
        val = math.exp(scale) * abs(signed) if signed != 0 else 0.0
        tail = math.exp(np.logaddexp(lt[k], log_c[k] + lst))
        ok = complete and tail <= tol * max(maj - tail, 0.0)
        norm = KernelEstimate(val, R, tail, _rel(val, tail), ok, k, n_terms)
        major = KernelEstimate(maj, R, tail, _rel(maj, tail), ok, k, n_terms)
        out[k] = (norm, major)
    return out


def kernel_norm(G: FuchsianGroupSpec, z: UhpPoint, w: UhpPoint, k: int, tol: float = 1e-6,
                **kwargs) -> KernelEstimate:
    """Hyperbolic norm ``y^k v^k |B_k(z, w)|`` of the Bergman kernel."""
    k = _check_k(k)
    return kernel_estimates(G, z, w, [k], tol, **kwargs)[k][0]


def majorant_sum(G: FuchsianGroupSpec, z: UhpPoint, w: UhpPoint, k: int, tol: float = 1e-6,
                 **kwargs) -> KernelEstimate:
    """``(2k-1)/(4 pi) sum_g cosh^-2k(d(g z, w)/2)`` with its tail."""
    k = _check_k(k)
    return kernel_estimates(G, z, w, [k], tol, **kwargs)[k][1]


# -- trace -----------------------------------------------------------------

def dimension_oracle(G: FuchsianGroupSpec, k: int) -> Optional[int]:
    """``dim S_2k`` where known: ``k - 2`` for ``gamma2_width1`` (genus 0, three
    cusps) and ``3(k - 1)`` for the genus-2 ``bolza`` group."""
    if G.name == "gamma2_width1":
        return k - 2
    if G.name == "bolza":
        return 3 * (k - 1)
    return None


@dataclass(frozen=True)
class TraceResult:
    k: int
    value: float
    error: float
    expected: Optional[int]
    n_points: int


def kernel_trace(G: FuchsianGroupSpec, k, mesh: float = 0.05, cutoff: Optional[float] = None,
                 radius: float = 7.0, subsamples: int = 4):
    """Integral of ``||B||(z, z)`` over the truncated fundamental domain.

    ``k`` may be a single weight or a list; a list returns one
    :class:`TraceResult` per weight and shares the orbit enumerations.
    """
    from .geometry import integrate_domain

    single = np.isscalar(k)
    ks = [_check_k(k)] if single else sorted({_check_k(v) for v in k})
    dom = G.truncated_domain(cutoff) if G.cusp is not None else G.domain
    if dom.bbox is None:
        raise ValueError(f"group {G.name!r} has no bounded domain for quadrature")

    def field(x, y):
        out = np.empty((x.size, len(ks)))
        for i, (a, b) in enumerate(zip(x, y)):
            p = UhpPoint(float(a), float(b))
            est = kernel_estimates(G, p, p, ks, radius=radius)
            out[i] = [est[kk][0].value for kk in ks]
        return out

    q = integrate_domain(dom, field, mesh, subsamples=subsamples)
    res = [TraceResult(kk, float(q.value[i]), float(q.error[i]), dimension_oracle(G, kk), q.n_points)
           for i, kk in enumerate(ks)]
    return res[0] if single else res

"""Upper half-plane primitives.

Points, PSL(2, R) elements, hyperbolic distance and quadrature against the
hyperbolic area measure ``dx dy / y**2``.  Scalar entry points take
:class:`UhpPoint` / :class:`Moebius`; the underscore helpers work on numpy
arrays and are what the orbit and kernel code use in their inner loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "UhpPoint",
    "Moebius",
    "HalfPlane",
    "Horoball",
    "DomainSpec",
    "GeodesicPolygon",
    "hull_polygon",
    "QuadratureResult",
    "mobius_apply",
    "j_factor",
    "compose",
    "inverse",
    "hyp_distance",
    "integrate_domain",
    "disk_to_uhp",
    "IDENTITY",
]

DET_TOL = 1e-12


@dataclass(frozen=True)
class UhpPoint:
    """A point ``x + iy`` of the upper half-plane."""

    x: float
    y: float

    def __post_init__(self):
        x, y = float(self.x), float(self.y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(f"non-finite coordinates ({x!r}, {y!r})")
        if not y > 0:
            raise ValueError(f"point must satisfy y > 0, got y={y!r}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_complex(cls, z: complex) -> "UhpPoint":
        return cls(z.real, z.imag)

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    def __iter__(self):
        yield self.x
        yield self.y


def _canonical_sign(entries):
    for e in entries:
        if e != 0:
            # adding 0 turns -0.0 into 0.0 and leaves exact types alone
            return tuple(-v + 0 for v in entries) if e < 0 else tuple(v + 0 for v in entries)
    raise ValueError("zero matrix")


@dataclass(frozen=True, eq=False)
class Moebius:
    """An element of PSL(2, R), stored with canonical sign.

    The first nonzero entry of ``(a, b, c, d)`` is made positive so that
    ``M`` and ``-M`` compare and hash equal.  ``exact`` optionally carries
    the same entries as ints or :class:`fractions.Fraction` values; when both
    operands of :func:`compose` have it, it is multiplied exactly.
    """

    a: float
    b: float
    c: float
    d: float
    exact: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        if self.exact is not None:
            ex = _canonical_sign(tuple(Fraction(v) for v in self.exact))
            if ex[0] * ex[3] - ex[1] * ex[2] != 1:
                raise ValueError(f"exact determinant is not 1: {ex}")
            ex = tuple(int(v) if v.denominator == 1 else v for v in ex)
            object.__setattr__(self, "exact", ex)
            vals = tuple(float(v) for v in ex)
        else:
            vals = _canonical_sign(tuple(float(v) for v in (self.a, self.b, self.c, self.d)))
            if not all(math.isfinite(v) for v in vals):
                raise ValueError("non-finite matrix entry")
            det = vals[0] * vals[3] - vals[1] * vals[2]
            scale = max(1.0, max(abs(v) for v in vals) ** 2)
            if abs(det - 1.0) > DET_TOL * scale:
                raise ValueError(f"determinant {det!r} differs from 1")
        for name, v in zip("abcd", vals):
            object.__setattr__(self, name, v)

    @classmethod
    def from_rows(cls, rows, exact: bool = False) -> "Moebius":
        (a, b), (c, d) = rows
        if exact:
            return cls(0, 0, 0, 0, exact=(a, b, c, d))
        return cls(a, b, c, d)

    @classmethod
    def normalized(cls, a, b, c, d) -> "Moebius":
        """Build from a matrix with positive determinant, rescaling it to 1."""
        det = a * d - b * c
        if det <= 0:
            raise ValueError("determinant must be positive")
        s = math.sqrt(det)
        return cls(a / s, b / s, c / s, d / s)

    @property
    def entries(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    @property
    def trace(self) -> float:
        return self.a + self.d

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=float)

    def _key(self):
        return self.exact if self.exact is not None else self.entries

    def __eq__(self, other):
        if not isinstance(other, Moebius):
            return NotImplemented
        if self.exact is not None and other.exact is not None:
            return self.exact == other.exact
        return self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __matmul__(self, other: "Moebius") -> "Moebius":
        return compose(self, other)

    def inv(self) -> "Moebius":
        return inverse(self)

    def __call__(self, z: UhpPoint) -> UhpPoint:
        return mobius_apply(self, z)


IDENTITY = Moebius(0, 0, 0, 0, exact=(1, 0, 0, 1))


def mobius_apply(g: Moebius, z: UhpPoint) -> UhpPoint:
    """Return ``(az + b) / (cz + d)``."""
    zc = z.z
    j = g.c * zc + g.d
    # numerator/denominator form loses the sign of tiny imaginary parts;
    # the height transform y/|j|^2 does not
    w = (g.a * zc + g.b) / j
    return UhpPoint(w.real, z.y / abs(j) ** 2)


def j_factor(g: Moebius, z: UhpPoint) -> complex:
    """Automorphy factor ``cz + d``."""
    return g.c * z.z + g.d


def compose(g1: Moebius, g2: Moebius) -> Moebius:
    if g1.exact is not None and g2.exact is not None:
        a1, b1, c1, d1 = g1.exact
        a2, b2, c2, d2 = g2.exact
        return Moebius(0, 0, 0, 0, exact=(a1 * a2 + b1 * c2, a1 * b2 + b1 * d2,
                                          c1 * a2 + d1 * c2, c1 * b2 + d1 * d2))
    a1, b1, c1, d1 = g1.entries
    a2, b2, c2, d2 = g2.entries
    return Moebius(a1 * a2 + b1 * c2, a1 * b2 + b1 * d2, c1 * a2 + d1 * c2, c1 * b2 + d1 * d2)


def inverse(g: Moebius) -> Moebius:
    if g.exact is not None:
        a, b, c, d = g.exact
        return Moebius(0, 0, 0, 0, exact=(d, -b, -c, a))
    return Moebius(g.d, -g.b, -g.c, g.a)


def hyp_distance(z: UhpPoint, w: UhpPoint) -> float:
    """Hyperbolic distance in the upper half-plane (curvature -1).

    Uses ``sinh(d/2) = |z - w| / (2 sqrt(y v))``, which equals the
    ``cosh(d/2) = |z - conj(w)| / (2 sqrt(y v))`` identity but keeps full
    relative accuracy when the points nearly coincide.
    """
    return float(_dist(z.x, z.y, w.x, w.y))


# -- array helpers ---------------------------------------------------------

def _dist(x1, y1, x2, y2):
    s = np.hypot(np.subtract(x1, x2), np.subtract(y1, y2)) / (2.0 * np.sqrt(np.multiply(y1, y2)))
    return 2.0 * np.arcsinh(s)


def _log_cosh_half_dist(x1, y1, x2, y2):
    """log cosh(d/2) = 0.5 * log(|z - conj w|^2 / (4 y v))."""
    num = np.subtract(x1, x2) ** 2 + np.add(y1, y2) ** 2
    return 0.5 * np.log(num / (4.0 * np.multiply(y1, y2)))


def _logcosh(x):
    x = np.abs(x)
    return x + np.log1p(np.exp(-2.0 * x)) - math.log(2.0)


def _logsinh(x):
    """log sinh(x) for x > 0, accurate near 0 and for large x."""
    x = np.asarray(x, dtype=float)
    return x + np.log(-np.expm1(-2.0 * x)) - math.log(2.0)


def _apply(mats, x, y):
    """Apply an (n, 4) stack of matrices to one point or to n points."""
    a, b, c, d = mats[..., 0], mats[..., 1], mats[..., 2], mats[..., 3]
    z = x + 1j * y
    j = c * z + d
    w = (a * z + b) / j
    return w.real, y / np.abs(j) ** 2


def _apply_inverse(mats, x, y):
    a, b, c, d = mats[..., 0], mats[..., 1], mats[..., 2], mats[..., 3]
    z = x + 1j * y
    j = -c * z + a
    w = (d * z - b) / j
    return w.real, y / np.abs(j) ** 2


def _matmul(m1, m2):
    """Batched 2x2 product of (..., 4) arrays."""
    a1, b1, c1, d1 = (m1[..., i] for i in range(4))
    a2, b2, c2, d2 = (m2[..., i] for i in range(4))
    return np.stack([a1 * a2 + b1 * c2, a1 * b2 + b1 * d2,
                     c1 * a2 + d1 * c2, c1 * b2 + d1 * d2], axis=-1)


def _inverse(m):
    return np.stack([m[..., 3], -m[..., 1], -m[..., 2], m[..., 0]], axis=-1)


def _canonical_rows(m):
    """Flip signs of rows so the first nonzero entry is positive."""
    m = np.array(m, copy=True)
    first = np.where(m[:, 0] != 0, m[:, 0], np.where(m[:, 1] != 0, m[:, 1],
                                                      np.where(m[:, 2] != 0, m[:, 2], m[:, 3])))
    m[first < 0] *= -1
    return m


# -- domains ---------------------------------------------------------------

@dataclass(frozen=True)
class HalfPlane:
    """Closed hyperbolic half-plane ``A |z|^2 + B x + C <= 0``.

    ``A = 0`` gives a vertical geodesic side, otherwise a semicircle centred
    on the real axis.  The discriminant ``B^2 - 4AC`` must be positive.
    """

    A: float
    B: float
    C: float

    def __post_init__(self):
        if not self.B ** 2 - 4 * self.A * self.C > 0:
            raise ValueError("degenerate half-plane (B^2 - 4AC <= 0)")

    @classmethod
    def right_of(cls, a: float) -> "HalfPlane":
        return cls(0.0, -1.0, a)

    @classmethod
    def left_of(cls, a: float) -> "HalfPlane":
        return cls(0.0, 1.0, -a)

    @classmethod
    def outside_circle(cls, center: float, radius: float) -> "HalfPlane":
        return cls(-1.0, 2.0 * center, radius ** 2 - center ** 2)

    @classmethod
    def inside_circle(cls, center: float, radius: float) -> "HalfPlane":
        return cls(1.0, -2.0 * center, center ** 2 - radius ** 2)

    @classmethod
    def bisector(cls, p: UhpPoint, q: UhpPoint) -> "HalfPlane":
        """Points at least as close to ``p`` as to ``q``."""
        x0, y0, x1, y1 = p.x, p.y, q.x, q.y
        return cls(y1 - y0, -2.0 * (y1 * x0 - y0 * x1),
                   y1 * (x0 ** 2 + y0 ** 2) - y0 * (x1 ** 2 + y1 ** 2))

    @classmethod
    def through(cls, p: UhpPoint, q: UhpPoint, inner: UhpPoint) -> "HalfPlane":
        """Half-plane bounded by the geodesic through ``p`` and ``q`` that
        contains ``inner``."""
        if abs(p.x - q.x) < 1e-14 * (1 + abs(p.x)):
            h = cls(0.0, 1.0, -p.x)
        else:
            c = (q.x ** 2 + q.y ** 2 - p.x ** 2 - p.y ** 2) / (2 * (q.x - p.x))
            h = cls(1.0, -2.0 * c, c * c - ((p.x - c) ** 2 + p.y ** 2))
        if h.form(inner.x, inner.y) > 0:
            h = cls(-h.A, -h.B, -h.C)
        return h

    def form(self, x, y):
        return self.A * (x * x + y * y) + self.B * x + self.C

    def contains(self, x, y, tol: float = 0.0):
        return self.form(x, y) <= tol

    def distance(self, x, y):
        """Hyperbolic distance from points to the half-plane (0 inside)."""
        q = self.form(x, y)
        disc = math.sqrt(self.B ** 2 - 4 * self.A * self.C)
        return np.arcsinh(np.maximum(q, 0.0) / (np.asarray(y) * disc))

    def boundary_points(self, n: int):
        """``n`` points along the boundary geodesic, parametrised by angle."""
        if self.A == 0:
            x0 = -self.C / self.B
            t = np.linspace(-6, 6, n)
            return np.full(n, x0), np.exp(t)
        c = -self.B / (2 * self.A)
        r = math.sqrt(self.B ** 2 - 4 * self.A * self.C) / (2 * abs(self.A))
        th = np.linspace(0, np.pi, n + 2)[1:-1]
        return c + r * np.cos(th), r * np.sin(th)


@dataclass(frozen=True)
class Horoball:
    """Open horoball removed from a domain.

    ``point=None`` means the horoball ``y > size`` at infinity; otherwise it
    is the Euclidean disk of diameter ``size`` tangent to the real axis at
    ``point``.
    """

    point: Optional[float]
    size: float

    def contains(self, x, y):
        if self.point is None:
            return np.asarray(y) > self.size
        r = self.size / 2.0
        return (np.asarray(x) - self.point) ** 2 + (np.asarray(y) - r) ** 2 < r * r

    def boundary_points(self, n: int):
        if self.point is None:
            return np.linspace(-50, 50, n), np.full(n, self.size)
        r = self.size / 2.0
        th = np.linspace(0, 2 * np.pi, n, endpoint=False)
        return self.point + r * np.cos(th), r + r * np.sin(th)


@dataclass(frozen=True)
class DomainSpec:
    """A fundamental domain as an intersection of geodesic half-planes.

    ``horoballs`` are removed for cusp truncation; ``bbox`` is
    ``(xmin, xmax, ymin, ymax)`` and must be finite with ``ymin > 0`` for
    quadrature and sampling.  ``center`` is an interior reference point.
    """

    sides: tuple
    horoballs: tuple = ()
    bbox: Optional[tuple] = None
    center: Optional[UhpPoint] = None

    def contains(self, x, y, tol: float = 1e-12):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ok = y > 0
        for s in self.sides:
            ok = ok & s.contains(x, y, tol)
        for h in self.horoballs:
            ok = ok & ~h.contains(x, y)
        return ok

    def __contains__(self, z: UhpPoint) -> bool:
        return bool(self.contains(z.x, z.y))

    def truncated(self, horoballs: Sequence[Horoball], bbox=None) -> "DomainSpec":
        return DomainSpec(self.sides, tuple(horoballs), bbox, self.center)

    @property
    def is_bounded(self) -> bool:
        if self.bbox is None:
            return False
        xmin, xmax, ymin, ymax = self.bbox
        return all(map(math.isfinite, self.bbox)) and ymin > 0 and xmax > xmin and ymax > ymin

    def boundary_samples(self, n: int = 400):
        """Points on the domain boundary (sides and horocycles) inside it."""
        xs, ys = [], []
        for part in self.sides + self.horoballs:
            x, y = part.boundary_points(n)
            keep = (y > 0) & self.contains(x, y, tol=1e-9)
            if isinstance(part, Horoball):
                keep &= np.all([s.contains(x, y, 1e-9) for s in self.sides], axis=0)
            xs.append(x[keep])
            ys.append(y[keep])
        return np.concatenate(xs), np.concatenate(ys)


def _geodesic_meets_geodesic(s, t):
    det = t.A * s.B - s.A * t.B
    if s.A == 0 and t.A == 0 or abs(det) < 1e-15:
        return []
    x = -(t.A * s.C - s.A * t.C) / det
    a, b, c = (s.A, s.B, s.C) if abs(s.A) >= abs(t.A) else (t.A, t.B, t.C)
    y2 = -(b * x + c) / a - x * x
    return [(x, math.sqrt(y2))] if y2 > 0 else []


def _real_roots(a, b, c):
    if abs(a) < 1e-15:
        return [-c / b] if abs(b) > 1e-15 else []
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    r = math.sqrt(disc)
    return [(-b - r) / (2 * a), (-b + r) / (2 * a)]


def _geodesic_meets_horocycle(s, h):
    if h.point is None:
        H = h.size
        if s.A == 0:
            return [(-s.C / s.B, H)]
        return [(x, H) for x in _real_roots(s.A, s.B, s.A * H * H + s.C)]
    p, size = h.point, h.size
    if s.A == 0:
        x0 = -s.C / s.B
        return [(x0, y) for y in _real_roots(1.0, -size, (x0 - p) ** 2)]
    # on the geodesic x^2 + y^2 = -(B x + C)/A, so y is linear in x
    u = (-s.B / s.A - 2 * p) / size
    v = (-s.C / s.A + p * p) / size
    xs = _real_roots(1.0 + u * u, 2 * u * v + s.B / s.A, v * v + s.C / s.A)
    return [(x, u * x + v) for x in xs]


@dataclass(frozen=True, eq=False)
class GeodesicPolygon:
    """Convex geodesic polygon given by its vertices in cyclic order."""

    x: np.ndarray
    y: np.ndarray

    @cached_property
    def _edges(self):
        out = []
        n = self.x.size
        for i in range(n):
            j = (i + 1) % n
            p, q = UhpPoint(self.x[i], self.y[i]), UhpPoint(self.x[j], self.y[j])
            side = HalfPlane.through(p, q, self.inner)
            out.append((i, j, side, math.sqrt(side.B ** 2 - 4 * side.A * side.C),
                        math.cosh(hyp_distance(p, q))))
        return out

    def distance(self, px, py):
        """Hyperbolic distance from points to the polygon (0 inside)."""
        px = np.asarray(px, dtype=float)
        py = np.asarray(py, dtype=float)
        vx, vy = self.x, self.y
        # cosh of point-vertex distances, shape (npts, nvert)
        ch = 1.0 + ((px[..., None] - vx) ** 2 + (py[..., None] - vy) ** 2) / (2.0 * py[..., None] * vy)
        inside = np.ones(px.shape, dtype=bool)
        best = np.full(px.shape, np.inf)
        for i, j, side, disc, cl in self._edges:
            q = side.form(px, py)
            inside &= q <= 0
            ci, cj = ch[..., i], ch[..., j]
            d_line = np.arcsinh(np.abs(q) / (py * disc))
            d = np.where(ci * cl <= cj, np.arccosh(np.maximum(ci, 1.0)),
                         np.where(cj * cl <= ci, np.arccosh(np.maximum(cj, 1.0)), d_line))
            np.minimum(best, d, out=best)
        return np.where(inside, 0.0, best)

    @property
    def inner(self) -> UhpPoint:
        """A point inside the polygon (Euclidean vertex mean)."""
        return UhpPoint(float(self.x.mean()), float(self.y.mean()))


def hull_polygon(domain: "DomainSpec", tol: float = 1e-9) -> Optional[GeodesicPolygon]:
    """Geodesic polygon spanned by the corners of a truncated domain.

    Corners are side-side and side-horocycle intersections on the domain
    boundary.  The polygon contains the domain; ``None`` is returned when
    the domain is not bounded by its corners.
    """
    if domain.center is None:
        return None
    cand = []
    for i, s in enumerate(domain.sides):
        for t in domain.sides[i + 1:]:
            cand += _geodesic_meets_geodesic(s, t)
        for h in domain.horoballs:
            cand += _geodesic_meets_horocycle(s, h)
    pts = []
    for x, y in cand:
        if not (y > 0 and math.isfinite(x) and math.isfinite(y)):
            continue
        scale = 1.0 + x * x + y * y
        if any(s.form(x, y) > tol * scale for s in domain.sides):
            continue
        if any(_horoball_depth(h, x, y) > tol * scale for h in domain.horoballs):
            continue
        if all(math.hypot(x - a, y - b) > tol * scale for a, b in pts):
            pts.append((x, y))
    if len(pts) < 3:
        return None
    c = domain.center.z
    ang = [np.angle((complex(x, y) - c) / (complex(x, y) - c.conjugate())) for x, y in pts]
    order = np.argsort(ang)
    poly = GeodesicPolygon(np.array([pts[i][0] for i in order]), np.array([pts[i][1] for i in order]))
    bx, by = domain.boundary_samples(200)
    if bx.size == 0 or np.any(poly.distance(bx, by) > 1e-7):
        return None
    return poly


def _horoball_depth(h, x, y):
    """Positive inside the open horoball, in units comparable to ``|z|^2``."""
    if h.point is None:
        return y - h.size
    r = h.size / 2.0
    return r * r - (x - h.point) ** 2 - (y - r) ** 2


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float
    coarse_value: float
    mesh: float
    n_points: int


def _quadrature_level(domain, f, h, subsamples):
    xmin, xmax, ymin, ymax = domain.bbox
    tmin, tmax = math.log(ymin), math.log(ymax)
    nt = max(1, math.ceil((tmax - tmin) / h))
    ht = (tmax - tmin) / nt
    tc = tmin + ht * (np.arange(nt) + 0.5)
    # cells of hyperbolic size about h: x-spacing proportional to the height
    nx = np.maximum(1, np.ceil((xmax - xmin) / (h * np.exp(tc)))).astype(np.int64)
    hx = (xmax - xmin) / nx
    row = np.repeat(np.arange(nt), nx)
    col = np.arange(row.size) - np.repeat(np.cumsum(nx) - nx, nx)
    HX = hx[row]
    XC = xmin + HX * (col + 0.5)
    TC = tc[row]
    off = (np.arange(subsamples) + 0.5) / subsamples - 0.5
    ox, ot = np.meshgrid(off, off * ht, indexing="ij")
    ox, ot = ox.ravel(), ot.ravel()
    weights = np.zeros(XC.size)
    # accumulate sub-cell measure e^{-t} dx dt in chunks to bound memory
    chunk = max(1, 2_000_000 // ox.size)
    for lo in range(0, XC.size, chunk):
        sl = slice(lo, lo + chunk)
        sx = XC[sl, None] + HX[sl, None] * ox[None, :]
        st = TC[sl, None] + ot[None, :]
        inside = domain.contains(sx, np.exp(st))
        weights[sl] = (inside * np.exp(-st)).sum(axis=1) * (HX[sl] * ht / ox.size)
    live = weights > 0
    vals = np.asarray(f(XC[live], np.exp(TC[live])), dtype=float)
    total = np.tensordot(weights[live], vals, axes=(0, 0))
    return (float(total) if total.ndim == 0 else total), int(live.sum())


def integrate_domain(domain: DomainSpec, f: Callable, mesh: float = 0.05, *,
                     subsamples: int = 4, vectorized: bool = True) -> QuadratureResult:
    """Integrate ``f`` over ``domain`` against ``dx dy / y^2``.

    Midpoint rule on cells of size ``mesh`` in ``log y`` and ``mesh * y`` in
    ``x`` (hyperbolically uniform, so thin cusps are resolved); cells
    cut by the boundary are weighted by the measure of their covered
    sub-samples.  The error estimate is the Richardson difference between
    meshes ``mesh`` and ``2 * mesh``, divided by 3.

    ``f(x, y)`` receives coordinate arrays when ``vectorized``; otherwise it
    is called once per :class:`UhpPoint`.  A vectorized ``f`` may return
    shape ``(n, m)`` to integrate ``m`` fields at once; ``value`` and
    ``error`` are then arrays.
    """
    if mesh <= 0:
        raise ValueError("mesh must be positive")
    if not domain.is_bounded:
        raise ValueError("domain is unbounded; supply a horoball cutoff and bbox")
    if not vectorized:
        scalar = f
        f = lambda x, y: np.array([scalar(UhpPoint(a, b)) for a, b in zip(x, y)])  # noqa: E731
    fine, n = _quadrature_level(domain, f, mesh, subsamples)
    coarse, _ = _quadrature_level(domain, f, 2 * mesh, subsamples)
    return QuadratureResult(fine, np.abs(fine - coarse) / 3.0, coarse, mesh, n)


# -- disk model ------------------------------------------------------------

_CAYLEY = np.array([[1j, 1j], [-1.0, 1.0]]) / np.sqrt(2j)


def disk_to_uhp(m) -> Moebius:
    """Transport a disk-model matrix ``[[alpha, beta], [conj beta, conj alpha]]``
    to PSL(2, R) via the Cayley map ``zeta -> i (1 + zeta) / (1 - zeta)``."""
    m = np.asarray(m, dtype=complex)
    h = _CAYLEY @ m @ np.linalg.inv(_CAYLEY)
    if np.max(np.abs(h.imag)) > 1e-10 * max(1.0, np.max(np.abs(h))):
        raise ValueError("matrix does not preserve the unit disk")
    return Moebius.normalized(*h.real.ravel())

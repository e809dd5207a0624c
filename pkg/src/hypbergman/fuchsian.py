"""Fuchsian groups: orbit enumeration, lattice-point counts, injectivity radius.

Orbit balls are enumerated by a breadth-first walk over the tiles ``g D`` of
a fundamental domain ``D`` whose sides are paired by known group elements.
A tile is expanded only if a lower bound on its distance to the target
point is within the radius.  The tiles meeting a closed ball form a
face-connected set, so the walk reaches every one of them and the result is
complete whenever the element budget is not exhausted.

Groups without a side-paired domain fall back to a depth-capped walk over
words in the generators; those balls are never marked complete.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np

from .geometry import (
    DomainSpec,
    HalfPlane,
    Horoball,
    Moebius,
    UhpPoint,
    _apply,
    _apply_inverse,
    _canonical_rows,
    _dist,
    _matmul,
    compose,
    disk_to_uhp,
    hull_polygon,
    hyp_distance,
    inverse,
)

__all__ = [
    "CuspData",
    "FuchsianGroupSpec",
    "OrbitBall",
    "InjectivityRadiusEstimate",
    "QuotientDistance",
    "EnumerationIncomplete",
    "built_in_group",
    "load_group",
    "group_from_dict",
    "reduce_point",
    "horoheight",
    "enumerate_ball",
    "counting_N",
    "translation_length",
    "classify",
    "injectivity_radius",
    "quotient_distance",
    "jl_count_check",
    "BUILT_IN_GROUPS",
]

DEFAULT_MAX_ELEMENTS = 2_000_000
_PRUNE_EPS = 1e-9


class EnumerationIncomplete(RuntimeError):
    """Raised when a count needs a complete ball but the budget ran out.

    ``lower_bound`` is the count over the partial enumeration.
    """

    def __init__(self, message, lower_bound=None):
        super().__init__(message)
        self.lower_bound = lower_bound


@dataclass(frozen=True)
class CuspData:
    width: float
    stabilizer: Moebius


@dataclass(frozen=True)
class FuchsianGroupSpec:
    """Generators plus the geometric data needed to walk the orbit.

    ``domain`` is an untruncated fundamental domain and ``side_pairings[i]``
    maps ``domain`` onto the tile across ``domain.sides[i]``.
    ``cusp_scalings`` hold one ``sigma`` per cusp vertex of ``domain`` with
    ``sigma(oo)`` the vertex and ``sigma^-1 Gamma_p sigma`` generated by
    ``z -> z + 1``; they define horoball truncation at a common height.
    """

    name: str
    generators: tuple
    free: bool
    compact: bool
    cusp: Optional[CuspData] = None
    domain: Optional[DomainSpec] = None
    side_pairings: Optional[tuple] = None
    cusp_scalings: tuple = ()
    test_only: bool = False
    horoball_floor: Optional[float] = None
    integral: bool = field(default=False)

    def __post_init__(self):
        if self.compact and self.cusp is not None:
            raise ValueError("a compact group has no cusp")
        if self.cusp is not None:
            st = self.cusp.stabilizer
            if abs(abs(st.trace) - 2.0) > 1e-9:
                raise ValueError("cusp stabilizer must be parabolic")
            if abs(st.c) > 1e-12 or abs(abs(st.b) - self.cusp.width) > 1e-9:
                raise ValueError("cusp stabilizer must be translation by the cusp width")
        if self.domain is not None:
            if self.side_pairings is None or len(self.side_pairings) != len(self.domain.sides):
                raise ValueError("each domain side needs a pairing element")
        integral = bool(self.generators) and all(
            float(v).is_integer() for g in self.generators for v in g.entries)
        object.__setattr__(self, "integral", integral)

    @property
    def default_cutoff(self) -> float:
        return 2.0 * self.cusp.width if self.cusp is not None else math.inf

    def truncated_domain(self, cutoff: Optional[float] = None) -> DomainSpec:
        """Fundamental domain with every cusp cut at horoheight ``cutoff``."""
        if self.domain is None:
            raise ValueError(f"group {self.name!r} has no fundamental domain")
        return _truncated_domain(self, self.default_cutoff if cutoff is None else float(cutoff))


@lru_cache(maxsize=64)
def _truncated_domain(G: FuchsianGroupSpec, cutoff: float) -> DomainSpec:
    balls = _horoballs(G, cutoff)
    dom = G.domain.truncated(balls)
    x, y = dom.boundary_samples(4000)
    if x.size == 0:
        raise ValueError("empty truncated domain")
    xr, ymin, ymax = x.max() - x.min(), y.min(), y.max()
    pad = 0.02
    bbox = (x.min() - pad * xr, x.max() + pad * xr, ymin * (1 - pad), ymax * (1 + pad))
    if not all(map(math.isfinite, bbox)) or ymax > 1e6 or ymin < 1e-9:
        bbox = None
    return dom.truncated(balls, bbox)


def _horoballs(G, cutoff):
    balls = []
    if math.isfinite(cutoff):
        for s in G.cusp_scalings:
            if abs(s.c) < 1e-14:
                balls.append(Horoball(None, s.a ** 2 * cutoff))
            else:
                balls.append(Horoball(s.a / s.c, 1.0 / (s.c ** 2 * cutoff)))
    return balls


@lru_cache(maxsize=256)
def _hull(G, height):
    return hull_polygon(G.domain.truncated(_horoballs(G, height)))


# -- built-in groups -------------------------------------------------------

def _gamma2_width1() -> FuchsianGroupSpec:
    T = Moebius.from_rows([[1, 1], [0, 1]], exact=True)
    B = Moebius.from_rows([[1, 0], [4, 1]], exact=True)
    Ti, Bi = inverse(T), inverse(B)
    sides = (HalfPlane.left_of(0.5), HalfPlane.right_of(-0.5),
             HalfPlane.outside_circle(0.25, 0.25), HalfPlane.outside_circle(-0.25, 0.25))
    domain = DomainSpec(sides, center=UhpPoint(0.0, 1.0))
    scalings = (
        Moebius.from_rows([[1, 0], [0, 1]]),
        Moebius(0.0, -0.5, 2.0, 0.0),
        Moebius.from_rows([[1, 0], [2, 1]]),
        Moebius.from_rows([[-1, -1], [2, 1]]),
    )
    return FuchsianGroupSpec(
        name="gamma2_width1", generators=(T, B), free=True, compact=False,
        cusp=CuspData(1.0, T), domain=domain, side_pairings=(T, Ti, B, Bi),
        cusp_scalings=scalings, horoball_floor=0.5)


def bolza_disk_generators():
    """The four standard Bolza generators in the disk model."""
    alpha = 1 + math.sqrt(2)
    beta = math.sqrt(2 + 2 * math.sqrt(2))
    out = []
    for k in range(4):
        e = np.exp(1j * k * np.pi / 4)
        out.append(np.array([[alpha, beta * e], [beta * np.conj(e), alpha]]))
    return out


def _bolza() -> FuchsianGroupSpec:
    gens = tuple(disk_to_uhp(m) for m in bolza_disk_generators())
    pairings = gens + tuple(inverse(g) for g in gens)
    center = UhpPoint(0.0, 1.0)
    sides = tuple(HalfPlane.bisector(center, g(center)) for g in pairings)
    # circumradius of the regular octagon with angles pi/4
    rc = math.acosh((1 + math.sqrt(2)) ** 2)
    bbox = (-math.sinh(rc), math.sinh(rc), math.exp(-rc), math.exp(rc))
    domain = DomainSpec(sides, bbox=bbox, center=center)
    return FuchsianGroupSpec(
        name="bolza", generators=gens, free=False, compact=True,
        domain=domain, side_pairings=pairings)


def _cyclic_test() -> FuchsianGroupSpec:
    g = Moebius(2.0, 0.0, 0.0, 0.5)
    sides = (HalfPlane.outside_circle(0.0, 1.0), HalfPlane.inside_circle(0.0, 4.0))
    domain = DomainSpec(sides, center=UhpPoint(0.0, 2.0))
    return FuchsianGroupSpec(
        name="cyclic_test", generators=(g,), free=True, compact=False,
        domain=domain, side_pairings=(inverse(g), g), test_only=True)


def _trivial() -> FuchsianGroupSpec:
    return FuchsianGroupSpec(name="trivial", generators=(), free=True, compact=False,
                             test_only=True)


BUILT_IN_GROUPS = {
    "gamma2_width1": _gamma2_width1,
    "bolza": _bolza,
    "cyclic_test": _cyclic_test,
    "trivial": _trivial,
}


@lru_cache(maxsize=None)
def built_in_group(name: str) -> FuchsianGroupSpec:
    """``gamma2_width1``, ``bolza``, ``cyclic_test`` (test oracle only) or
    ``trivial`` (test oracle only)."""
    try:
        return BUILT_IN_GROUPS[name]()
    except KeyError:
        raise ValueError(f"unknown group {name!r}; choose from {sorted(BUILT_IN_GROUPS)}") from None


def _matrix(rows, what):
    try:
        (a, b), (c, d) = rows
        a, b, c, d = map(float, (a, b, c, d))
    except (TypeError, ValueError):
        raise ValueError(f"{what}: expected [[a, b], [c, d]], got {rows!r}") from None
    det = a * d - b * c
    if abs(det - 1.0) > 1e-9:
        raise ValueError(f"{what}: determinant {det!r} is not 1")
    if all(v.is_integer() for v in (a, b, c, d)):
        return Moebius(0, 0, 0, 0, exact=tuple(int(v) for v in (a, b, c, d)))
    return Moebius.normalized(a, b, c, d)


def group_from_dict(data: dict) -> FuchsianGroupSpec:
    """Build a group from the JSON group-file structure.

    Required keys: ``name``, ``generators``, ``compact``, ``free``; optional
    ``cusp`` ``{width, stabilizer}`` and ``domain`` ``{sides: [{A, B, C,
    pairing}], center: [x, y], cusp_scalings: [matrix, ...], bbox}`` where
    ``pairing`` is a generator index, or ``-index - 1`` for its inverse.
    """
    gens = tuple(_matrix(m, f"generator {i}") for i, m in enumerate(data["generators"]))
    cusp = None
    if data.get("cusp"):
        c = data["cusp"]
        cusp = CuspData(float(c["width"]), _matrix(c["stabilizer"], "cusp stabilizer"))
    domain = pairings = None
    scalings = ()
    if data.get("domain"):
        dd = data["domain"]
        sides, pairings = [], []
        for s in dd["sides"]:
            sides.append(HalfPlane(float(s["A"]), float(s["B"]), float(s["C"])))
            p = int(s["pairing"])
            pairings.append(gens[p] if p >= 0 else inverse(gens[-p - 1]))
        center = UhpPoint(*dd["center"]) if dd.get("center") else None
        bbox = tuple(dd["bbox"]) if dd.get("bbox") else None
        domain = DomainSpec(tuple(sides), bbox=bbox, center=center)
        pairings = tuple(pairings)
        scalings = tuple(Moebius.normalized(*(float(v) for row in m for v in row))
                         for m in dd.get("cusp_scalings", []))
    return FuchsianGroupSpec(
        name=str(data["name"]), generators=gens, free=bool(data["free"]),
        compact=bool(data["compact"]), cusp=cusp, domain=domain,
        side_pairings=pairings, cusp_scalings=scalings)


def load_group(source) -> FuchsianGroupSpec:
    """A built-in name or a path to a JSON group file."""
    if isinstance(source, FuchsianGroupSpec):
        return source
    if str(source) in BUILT_IN_GROUPS:
        return built_in_group(str(source))
    path = Path(source)
    if not path.exists():
        raise ValueError(f"{source!r} is neither a built-in group nor a file")
    return group_from_dict(json.loads(path.read_text()))


# -- reduction -------------------------------------------------------------

def _side_forms(G, x, y):
    return np.array([s.form(x, y) for s in G.domain.sides])


def reduce_point(G: FuchsianGroupSpec, z: UhpPoint, max_steps: int = 100_000):
    """Return ``(z0, h)`` with ``z0`` in the fundamental domain and ``z = h z0``."""
    if G.domain is None:
        return z, np.array([1.0, 0.0, 0.0, 1.0])
    pair = np.array([p.entries for p in G.side_pairings])
    h = np.array([1.0, 0.0, 0.0, 1.0])
    x, y = z.x, z.y
    for _ in range(max_steps):
        q = _side_forms(G, x, y)
        i = int(np.argmax(q))
        if q[i] <= 1e-13:
            return UhpPoint(x, y), h
        x, y = _apply_inverse(pair[i], x, y)
        x, y = float(x), float(y)
        h = _matmul(h, pair[i])
    raise RuntimeError("point reduction did not terminate")


def horoheight(G: FuchsianGroupSpec, z: UhpPoint) -> float:
    """Largest normalised height of ``z`` over the cusps of ``G`` (0 if none)."""
    if not G.cusp_scalings:
        return 0.0
    z0, _ = reduce_point(G, z)
    hs = [float(_apply_inverse(s.as_array(), z0.x, z0.y)[1]) for s in G.cusp_scalings]
    return max(hs)


# -- orbit balls -----------------------------------------------------------

@dataclass
class OrbitBall:
    """Elements ``g`` with ``d(g z, w) <= radius``, sorted by that distance.

    ``matrices`` is an ``(n, 4)`` array of canonical-sign entries.
    """

    matrices: np.ndarray
    distances: np.ndarray
    radius: float
    complete: bool
    n_visited: int = 0
    integral: bool = False

    def __len__(self):
        return len(self.distances)

    @property
    def elements(self) -> list:
        if self.integral:
            return [Moebius(0, 0, 0, 0, exact=tuple(int(v) for v in np.rint(m)))
                    for m in self.matrices]
        return [Moebius.normalized(*m) for m in self.matrices]

    def keys(self) -> set:
        """Hashable element keys (exact for integral groups)."""
        if self.integral:
            return {tuple(int(v) for v in np.rint(m)) for m in self.matrices}
        return {tuple(np.round(m, 9)) for m in self.matrices}


class _SpatialIndex:
    """Deduplicates tiles by their orbit point of an interior reference.

    Orbit points of distinct tiles are at least ``sep`` apart while copies of
    one tile agree to rounding error.  Points are binned in ``log y`` and ``x``
    on four half-shifted grids much finer than ``sep``; two copies share a
    bin on at least one grid and distinct tiles never do.  Horizontal bins
    are scaled by the height of their row so that bins are roughly
    ``q`` across in the hyperbolic metric.
    """

    def __init__(self, sep):
        self.q = min(sep / 8.0, 1e-3)
        self.seen = [set() for _ in range(4)]

    def add_many(self, x, y) -> np.ndarray:
        u = np.log(y) / self.q
        grids = []
        for ou in (0.0, 0.5):
            iu = np.floor(u + ou)
            # x measured in units of the bin's own height
            v = x / (np.exp((iu - ou) * self.q) * self.q)
            for ov in (0.0, 0.5):
                grids.append(list(zip(iu.astype(np.int64).tolist(),
                                      np.floor(v + ov).astype(np.int64).tolist())))
        new = np.zeros(x.shape[0], dtype=bool)
        for i in range(x.shape[0]):
            keys = [g[i] for g in grids]
            if any(k in s for k, s in zip(keys, self.seen)):
                continue
            for k, s in zip(keys, self.seen):
                s.add(k)
            new[i] = True
        return new


def _tile_separation(G) -> float:
    c = G.domain.center
    return 2.0 * min(float(np.arcsinh(abs(s.form(c.x, c.y)) /
                                      (c.y * math.sqrt(s.B ** 2 - 4 * s.A * s.C))))
                     for s in G.domain.sides)


def _tile_walk(G, w, R, max_elements, height):
    """All g whose tile, truncated at horoheight ``height``, meets B(w, R).

    The pruning bound is the larger of the distance from ``g^-1 w`` to each
    side half-plane and to the geodesic hull of the truncated domain.
    """
    hull = _hull(G, height)
    pair = np.array([p.entries for p in G.side_pairings])
    sides = G.domain.sides
    _, gw = reduce_point(G, w)
    start = gw[None, :]
    exact = G.integral
    if exact:
        start = _canonical_rows(np.rint(start))
        seen = {start[0].astype(np.int64).tobytes()}
    else:
        c = G.domain.center
        index = _SpatialIndex(_tile_separation(G))
        cx, cy = _apply(start, c.x, c.y)
        index.add_many(cx, cy)
    found = [start]
    frontier = start
    total = 1
    complete = True
    while frontier.shape[0]:
        cand = _matmul(frontier[:, None, :], pair[None, :, :]).reshape(-1, 4)
        px, py = _apply_inverse(cand, w.x, w.y)
        lb = np.zeros(cand.shape[0])
        for s in sides:
            np.maximum(lb, s.distance(px, py), out=lb)
        if hull is not None:
            np.maximum(lb, hull.distance(px, py), out=lb)
        cand = cand[lb <= R + _PRUNE_EPS]
        if exact:
            cand = _canonical_rows(np.rint(cand))
            ints = cand.astype(np.int64)
            keep = []
            for i in range(ints.shape[0]):
                key = ints[i].tobytes()
                if key not in seen:
                    seen.add(key)
                    keep.append(i)
        else:
            c = G.domain.center
            cx, cy = _apply(cand, c.x, c.y)
            keep = index.add_many(cx, cy)
        frontier = cand[keep]
        found.append(frontier)
        total += frontier.shape[0]
        if total > max_elements:
            complete = False
            break
    return np.concatenate(found), complete


def _word_walk(G, z0, w, R, max_depth=12, max_elements=DEFAULT_MAX_ELEMENTS):
    letters = [g.as_array() for g in G.generators] + [inverse(g).as_array() for g in G.generators]
    letters = np.array(letters)
    seen = {tuple(np.round([1.0, 0.0, 0.0, 1.0], 9))}
    found = [np.array([[1.0, 0.0, 0.0, 1.0]])]
    frontier = found[0]
    for _ in range(max_depth):
        if not frontier.shape[0]:
            break
        cand = _canonical_rows(_matmul(frontier[:, None, :], letters[None, :, :]).reshape(-1, 4))
        keep = []
        for i, m in enumerate(cand):
            key = tuple(np.round(m, 9))
            if key not in seen:
                seen.add(key)
                keep.append(i)
        frontier = cand[keep]
        found.append(frontier)
        if sum(f.shape[0] for f in found) > max_elements:
            break
    return np.concatenate(found), False


def enumerate_ball(G: FuchsianGroupSpec, z: UhpPoint, w: UhpPoint, R: float,
                   max_elements: int = DEFAULT_MAX_ELEMENTS) -> OrbitBall:
    """Group elements ``g`` with ``d(g z, w) <= R``.

    ``complete`` certifies that no such element was missed.  If the element
    budget runs out the partial ball is returned with ``complete=False``.
    """
    if R < 0:
        raise ValueError("radius must be nonnegative")
    if not G.generators:
        d = hyp_distance(z, w)
        keep = d <= R
        mats = np.array([[1.0, 0.0, 0.0, 1.0]])[:int(keep)]
        return OrbitBall(mats, np.array([d])[:int(keep)], R, True, 1, True)
    z0, h = reduce_point(G, z)
    if G.domain is not None:
        height = math.inf
        if G.cusp_scalings:
            floor = G.horoball_floor if G.horoball_floor is not None else (G.default_cutoff if G.cusp else 1.0)
            height = max(floor, horoheight(G, z0), horoheight(G, w)) * (1 + 1e-9)
        mats, complete = _tile_walk(G, w, R, max_elements, height)
    else:
        mats, complete = _word_walk(G, z0, w, R, max_elements=max_elements)
    ox, oy = _apply(mats, z0.x, z0.y)
    d = _dist(ox, oy, w.x, w.y)
    sel = d <= R
    mats, d = mats[sel], d[sel]
    # g' z0 = g' h^-1 z
    hinv = np.array([h[3], -h[1], -h[2], h[0]])
    mats = _matmul(mats, hinv[None, :])
    if G.integral:
        mats = np.rint(mats)
    mats = _canonical_rows(mats)
    order = np.argsort(d, kind="stable")
    return OrbitBall(mats[order], d[order], float(R), complete, int(sel.size), G.integral)


def _stabilizer_mask(G, mats):
    if G.cusp is None:
        return np.zeros(mats.shape[0], dtype=bool)
    scale = np.maximum(1.0, np.abs(mats).max(axis=1))
    return np.abs(mats[:, 2]) <= 1e-12 * scale


def counting_N(G: FuchsianGroupSpec, z: UhpPoint, w: UhpPoint, rho: float,
               max_elements: int = DEFAULT_MAX_ELEMENTS) -> int:
    """Number of ``g`` not fixing the cusp with ``d(g z, w) <= rho``."""
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    ball = enumerate_ball(G, z, w, rho, max_elements)
    n = int((~_stabilizer_mask(G, ball.matrices)).sum())
    if not ball.complete:
        raise EnumerationIncomplete(f"enumeration of radius {rho} incomplete", lower_bound=n)
    return n


def classify(g: Moebius, tol: float = 1e-9) -> str:
    t = abs(g.trace)
    if abs(g.a - 1) < tol and abs(g.d - 1) < tol and abs(g.b) < tol and abs(g.c) < tol:
        return "identity"
    if abs(t - 2) <= tol:
        return "parabolic"
    return "hyperbolic" if t > 2 else "elliptic"


def translation_length(g: Moebius) -> float:
    """``2 arccosh(|tr|/2)`` for hyperbolic ``g``; 0 otherwise (see :func:`classify`)."""
    t = abs(g.trace)
    return 2.0 * math.acosh(t / 2.0) if t > 2.0 else 0.0


def _translation_lengths(mats):
    t = np.abs(mats[:, 0] + mats[:, 3])
    return np.where(t > 2.0, 2.0 * np.arccosh(np.maximum(t, 2.0) / 2.0), 0.0)


# -- injectivity radius ----------------------------------------------------

@dataclass(frozen=True)
class InjectivityRadiusEstimate:
    value: float
    method: str
    witnesses: tuple = ()
    certified: bool = True
    cutoff: float = math.inf


POLICIES = ("auto", "systole_only", "systole_and_truncated_parabolic", "user_override")


def _domain_radius(G, dom, center):
    x, y = dom.boundary_samples(2000)
    return float(np.max(_dist(x, y, center.x, center.y))) + 0.05


def injectivity_radius(G: FuchsianGroupSpec, policy: str = "auto", value: Optional[float] = None,
                       cutoff: Optional[float] = None,
                       max_elements: int = DEFAULT_MAX_ELEMENTS) -> InjectivityRadiusEstimate:
    """Estimate the injectivity radius (infimal displacement) of ``G``.

    ``systole_only`` returns the minimal translation length over a certified
    ball large enough to contain a conjugate of every shorter element.
    ``systole_and_truncated_parabolic`` also minimises ``d(z, g z)`` for
    parabolic ``g`` outside the cusp stabiliser over sample points of the
    fundamental domain truncated at horoheight ``cutoff``.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    if policy == "user_override":
        if value is None or not value > 0:
            raise ValueError("user_override needs a positive value")
        return InjectivityRadiusEstimate(float(value), "user_override")
    if policy == "auto":
        policy = "systole_and_truncated_parabolic" if G.cusp is not None else "systole_only"
    if cutoff is None:
        cutoff = G.default_cutoff
    return _injectivity_radius(G, policy, float(cutoff), max_elements)


@lru_cache(maxsize=64)
def _injectivity_radius(G, policy, cutoff, max_elements):
    if G.domain is None:
        raise ValueError("injectivity radius needs a fundamental domain")
    center = G.domain.center
    dom = G.truncated_domain(cutoff) if math.isfinite(cutoff) and G.cusp_scalings else G.domain
    rho = _domain_radius(G, dom, center)

    R = 2 * rho + 1.0
    L = math.inf
    certified = True
    while True:
        ball = enumerate_ball(G, center, center, R, max_elements)
        tl = _translation_lengths(ball.matrices)
        hyper = tl > 0
        if hyper.any():
            L = float(tl[hyper].min())
            break
        if not ball.complete or R > 60:
            certified = False
            break
        R *= 1.5
    if math.isfinite(L) and L + 2 * rho > R:
        ball = enumerate_ball(G, center, center, L + 2 * rho, max_elements)
        tl = _translation_lengths(ball.matrices)
        L = float(tl[tl > 0].min())
    certified = certified and ball.complete
    witnesses = [m for m, t in zip(ball.matrices, tl) if t > 0 and t <= L + 1e-9]
    best, method = L, "systole_only"

    if policy == "systole_and_truncated_parabolic" and G.cusp is not None:
        method = policy
        t = np.abs(ball.matrices[:, 0] + ball.matrices[:, 3])
        para = (np.abs(t - 2.0) < 1e-9) & ~_stabilizer_mask(G, ball.matrices)
        para &= ~np.all(np.abs(ball.matrices - [1, 0, 0, 1]) < 1e-12, axis=1)
        pm = ball.matrices[para]
        bx, by = dom.boundary_samples(400)
        gx, gy = _interior_samples(dom, 60)
        sx, sy = np.concatenate([bx, gx]), np.concatenate([by, gy])
        pmin = math.inf
        pw = []
        for m in pm:
            ix, iy = _apply(m, sx, sy)
            dm = float(np.min(_dist(sx, sy, ix, iy)))
            if dm < pmin - 1e-12:
                pmin, pw = dm, [m]
            elif dm <= pmin + 1e-12:
                pw.append(m)
        if pmin < best:
            best, witnesses = pmin, pw
    wit = tuple(Moebius.normalized(*m) for m in witnesses)
    return InjectivityRadiusEstimate(best, method, wit, certified, cutoff)


def _interior_samples(dom, n):
    xmin, xmax, ymin, ymax = dom.bbox
    x, t = np.meshgrid(np.linspace(xmin, xmax, n), np.linspace(math.log(ymin), math.log(ymax), n))
    x, y = x.ravel(), np.exp(t.ravel())
    keep = dom.contains(x, y)
    return x[keep], y[keep]


# -- distances on the quotient --------------------------------------------

@dataclass(frozen=True)
class QuotientDistance:
    value: float
    certified: bool
    element: Optional[Moebius] = None


def quotient_distance(G: FuchsianGroupSpec, z: UhpPoint, w: UhpPoint,
                      max_elements: int = DEFAULT_MAX_ELEMENTS) -> QuotientDistance:
    """Surface distance ``min_g d(z, g w)`` with a completeness flag.

    ``element`` is a minimiser ``g`` with ``d(g z, w)`` equal to the value.
    """
    z0, hz = reduce_point(G, z)
    w0, hw = reduce_point(G, w)
    d0 = hyp_distance(z0, w0)
    ball = enumerate_ball(G, z0, w0, d0, max_elements)
    if len(ball) == 0:
        return QuotientDistance(d0, False)
    m = ball.matrices[0]
    # d(m z0, w0) = d(hw m hz^-1 z, w)
    hzinv = np.array([hz[3], -hz[1], -hz[2], hz[0]])
    g = _matmul(_matmul(hw, m), hzinv)
    el = Moebius.normalized(*g) if not G.integral else Moebius(0, 0, 0, 0, exact=tuple(int(v) for v in np.rint(g)))
    return QuotientDistance(float(ball.distances[0]), ball.complete, el)


def jl_count_check(G: FuchsianGroupSpec, z: UhpPoint, w: UhpPoint, delta: float, r: float):
    """Check ``N(z, w; delta) <= sinh(delta + r) / sinh(r)``.

    Returns ``(holds, slack)`` with ``slack = bound - N``.
    """
    if not delta > 0 or not r > 0:
        raise ValueError("delta and r must be positive")
    n = counting_N(G, z, w, delta)
    bound = math.sinh(delta + r) / math.sinh(r)
    return n <= bound, bound - n

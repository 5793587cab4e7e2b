"""Compact convex bodies in R^1 and R^2 and their support functions.

Intervals use exact :class:`~fractions.Fraction` arithmetic end to end.
Polygons keep exact rational vertices, so hulls, containment and edge
normals are decided exactly; distances, norms and support-function
suprema need square roots and come back as floats.

The embedding of bodies into continuous functions on the unit sphere is
realized by :class:`SupportFn`, a real linear combination of support
functions plus a constant multiple of the unit function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key, lru_cache
from numbers import Rational, Real
from typing import NamedTuple

from .errors import (
    DimMismatch,
    EmptyBody,
    InternalCheckFailed,
    NegativeScale,
    NotIncreasing,
    UnboundedSequence,
)

DEFAULT_TOL = 1e-9
TWO_PI = 2.0 * math.pi


def as_fraction(x) -> Fraction:
    """Exact rational value of ``x`` (int, Fraction, "p/q" string, finite float)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, Real):
        return Fraction(float(x))
    raise TypeError(f"cannot interpret {x!r} as a rational")


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points):
    """Strict convex hull (no collinear triples), counter-clockwise,
    starting at the lexicographically smallest vertex."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return tuple(pts)
    lower = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return tuple(lower[:-1] + upper[:-1])


@dataclass(frozen=True)
class ConvexBody:
    """A nonempty compact convex subset of R^dim.

    For ``dim == 1`` ``vertices`` is ``(lo, hi)``; for ``dim == 2`` it is the
    canonical counter-clockwise vertex cycle of the polygon (1 vertex for a
    point, 2 for a segment).  Equality is exact structural equality.
    """

    dim: int
    vertices: tuple

    @property
    def lo(self) -> Fraction:
        if self.dim != 1:
            raise AttributeError("lo is only defined for intervals")
        return self.vertices[0]

    @property
    def hi(self) -> Fraction:
        if self.dim != 1:
            raise AttributeError("hi is only defined for intervals")
        return self.vertices[1]

    def is_zero(self) -> bool:
        if self.dim == 1:
            return self.vertices == (0, 0)
        return self.vertices == ((0, 0),)

    def __repr__(self):
        if self.dim == 1:
            return f"[{self.lo}, {self.hi}]"
        return "conv(" + ", ".join(f"({x}, {y})" for x, y in self.vertices) + ")"

    def to_json(self) -> dict:
        if self.dim == 1:
            return {"dim": 1, "lo": str(self.lo), "hi": str(self.hi)}
        return {"dim": 2, "vertices": [[str(x), str(y)] for x, y in self.vertices]}

    @classmethod
    def from_json(cls, data: dict) -> ConvexBody:
        dim = data.get("dim")
        if dim == 1:
            return interval(data["lo"], data["hi"])
        if dim == 2:
            return polygon([tuple(v) for v in data["vertices"]])
        raise ValueError(f"unsupported body dimension {dim!r}")


def interval(lo, hi) -> ConvexBody:
    lo, hi = as_fraction(lo), as_fraction(hi)
    if lo > hi:
        raise EmptyBody(f"interval [{lo}, {hi}] is empty")
    return ConvexBody(1, (lo, hi))


def polygon(points) -> ConvexBody:
    pts = [(as_fraction(x), as_fraction(y)) for x, y in points]
    if not pts:
        raise EmptyBody("no points given")
    return ConvexBody(2, convex_hull(pts))


def point(*coords) -> ConvexBody:
    if len(coords) == 1:
        return interval(coords[0], coords[0])
    return polygon([coords])


def zero(dim: int) -> ConvexBody:
    return point(*([0] * dim))


def unit_ball(dim: int) -> ConvexBody:
    """The closed unit ball; only polygonal (an interval) for ``dim == 1``.

    In the plane the Euclidean disk has no polygon representative; its
    embedded image is ``SupportFn.unit(2)``.
    """
    if dim == 1:
        return interval(-1, 1)
    raise ValueError("the Euclidean unit disk is not a polygon; use SupportFn.unit(2)")


def mk_body(raw_points) -> ConvexBody:
    """Convex hull of a nonempty point sequence, in canonical form.

    Scalars (or 1-tuples) give an interval, pairs give a polygon.
    """
    raw = list(raw_points)
    if not raw:
        raise EmptyBody("mk_body needs at least one point")
    first = raw[0]
    if isinstance(first, (tuple, list)):
        if len(first) == 1:
            vals = [as_fraction(p[0]) for p in raw]
            return interval(min(vals), max(vals))
        return polygon(raw)
    vals = [as_fraction(p) for p in raw]
    return interval(min(vals), max(vals))


def _check_dims(A: ConvexBody, B: ConvexBody):
    if A.dim != B.dim:
        raise DimMismatch(f"dimension {A.dim} vs {B.dim}")


def _start_bottom(vs):
    n = len(vs)
    s = min(range(n), key=lambda i: (vs[i][1], vs[i][0]))
    rot = vs[s:] + vs[:s]
    edges = []
    if n > 1:
        for i in range(n):
            a, b = rot[i], rot[(i + 1) % n]
            edges.append((b[0] - a[0], b[1] - a[1]))
    return rot[0], edges


def _half(d):
    return 0 if d[1] > 0 or (d[1] == 0 and d[0] > 0) else 1


def _cross_sign(a, b):
    """Sign of a[0]*b[1] - a[1]*b[0], on integer numerators and denominators."""
    ax, ay, bx, by = a[0], a[1], b[0], b[1]
    lhs = ax.numerator * by.numerator * ay.denominator * bx.denominator
    rhs = ay.numerator * bx.numerator * ax.denominator * by.denominator
    return (lhs > rhs) - (lhs < rhs)


def _angle_cmp(a, b):
    ha, hb = _half(a), _half(b)
    if ha != hb:
        return ha - hb
    return -_cross_sign(a, b)


_ANGLE_KEY = cmp_to_key(_angle_cmp)


@lru_cache(maxsize=65536)
def minkowski_sum(A: ConvexBody, B: ConvexBody) -> ConvexBody:
    """A + B by merging the edge sequences of both polygons in angular order."""
    _check_dims(A, B)
    if A.dim == 1:
        return ConvexBody(1, (A.lo + B.lo, A.hi + B.hi))
    a0, ea = _start_bottom(A.vertices)
    b0, eb = _start_bottom(B.vertices)
    p = (a0[0] + b0[0], a0[1] + b0[1])
    # both edge lists are sorted by angle from the bottom vertex; merge them
    # and join parallel pairs (a polygon has no parallel consecutive edges)
    edges = []
    i = j = 0
    while i < len(ea) and j < len(eb):
        c = _angle_cmp(ea[i], eb[j])
        if c < 0:
            edges.append(ea[i])
            i += 1
        elif c > 0:
            edges.append(eb[j])
            j += 1
        else:
            edges.append((ea[i][0] + eb[j][0], ea[i][1] + eb[j][1]))
            i += 1
            j += 1
    edges.extend(ea[i:])
    edges.extend(eb[j:])
    pts = [p]
    for e in edges[:-1]:
        p = (p[0] + e[0], p[1] + e[1])
        pts.append(p)
    s = pts.index(min(pts))
    return ConvexBody(2, tuple(pts[s:] + pts[:s]))


def scale(r, A: ConvexBody) -> ConvexBody:
    r = as_fraction(r)
    if r < 0:
        raise NegativeScale(f"cannot scale a body by {r}")
    if r == 0:
        return zero(A.dim)
    if r == 1:
        return A
    if A.dim == 1:
        return ConvexBody(1, (r * A.lo, r * A.hi))
    return ConvexBody(2, tuple((r * x, r * y) for x, y in A.vertices))


def translate(A: ConvexBody, c) -> ConvexBody:
    if A.dim == 1:
        c = as_fraction(c[0] if isinstance(c, (tuple, list)) else c)
        return ConvexBody(1, (A.lo + c, A.hi + c))
    cx, cy = as_fraction(c[0]), as_fraction(c[1])
    return ConvexBody(2, tuple((x + cx, y + cy) for x, y in A.vertices))


def _inside(p, vs) -> bool:
    n = len(vs)
    if n == 1:
        return p == vs[0]
    if n == 2:
        a, b = vs
        if _cross(a, b, p) != 0:
            return False
        return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
    return all(_cross(vs[i], vs[(i + 1) % n], p) >= 0 for i in range(n))


def contains(B: ConvexBody, A: ConvexBody) -> bool:
    """Exact test of A ⊆ B."""
    _check_dims(A, B)
    if A.dim == 1:
        return B.lo <= A.lo and A.hi <= B.hi
    return all(_inside(p, B.vertices) for p in A.vertices)


def contains_point(B: ConvexBody, p) -> bool:
    if B.dim == 1:
        x = as_fraction(p[0] if isinstance(p, (tuple, list)) else p)
        return B.lo <= x <= B.hi
    return _inside((as_fraction(p[0]), as_fraction(p[1])), B.vertices)


def _dist2_segment(p, a, b):
    dx, dy = b[0] - a[0], b[1] - a[1]
    px, py = p[0] - a[0], p[1] - a[1]
    dd = dx * dx + dy * dy
    if dd == 0:
        return px * px + py * py
    t = (px * dx + py * dy) / dd
    if t <= 0:
        return px * px + py * py
    if t >= 1:
        qx, qy = p[0] - b[0], p[1] - b[1]
        return qx * qx + qy * qy
    qx, qy = px - t * dx, py - t * dy
    return qx * qx + qy * qy


def dist2_point(p, B: ConvexBody):
    """Exact squared Euclidean distance from a point to a polygon."""
    vs = B.vertices
    n = len(vs)
    if n >= 3 and _inside(p, vs):
        return Fraction(0)
    if n == 1:
        return _dist2_segment(p, vs[0], vs[0])
    return min(_dist2_segment(p, vs[i], vs[(i + 1) % n]) for i in range(n))


def point_distance(p, B: ConvexBody):
    """d(p, B); exact for intervals, float for polygons."""
    if B.dim == 1:
        x = as_fraction(p[0] if isinstance(p, (tuple, list)) else p)
        return max(Fraction(0), B.lo - x, x - B.hi)
    return math.sqrt(dist2_point((as_fraction(p[0]), as_fraction(p[1])), B))


def excess(A: ConvexBody, B: ConvexBody):
    """e(A, B) = sup over a in A of d(a, B); attained at a vertex of A."""
    _check_dims(A, B)
    if A.dim == 1:
        return max(Fraction(0), B.lo - A.lo, A.hi - B.hi)
    worst = max(dist2_point(p, B) for p in A.vertices)
    return math.sqrt(worst)


def hausdorff_excess(A: ConvexBody, B: ConvexBody):
    """Hausdorff distance as the larger of the two excesses."""
    return max(excess(A, B), excess(B, A))


def hausdorff(A: ConvexBody, B: ConvexBody, tol: float = DEFAULT_TOL):
    """Hausdorff distance h(A, B).

    Intervals: exact.  Polygons: computed as the sup-norm distance of the
    support functions and cross-checked against the excess formula; a
    disagreement beyond ``tol`` raises :class:`InternalCheckFailed`.
    """
    _check_dims(A, B)
    if A.dim == 1:
        return max(abs(A.lo - B.lo), abs(A.hi - B.hi))
    s = (embed(A) - embed(B)).norm()
    e = hausdorff_excess(A, B)
    if abs(s - e) > tol * (1.0 + max(s, e)):
        raise InternalCheckFailed(f"support form {s!r} != excess form {e!r} for {A} and {B}")
    return s


def norm_h(A: ConvexBody):
    """|A|_h = h(A, {0}) = largest vertex norm."""
    if A.dim == 1:
        return max(abs(A.lo), abs(A.hi))
    return math.sqrt(max(x * x + y * y for x, y in A.vertices))


def hull_union(A: ConvexBody, B: ConvexBody) -> ConvexBody:
    _check_dims(A, B)
    if A.dim == 1:
        return ConvexBody(1, (min(A.lo, B.lo), max(A.hi, B.hi)))
    return ConvexBody(2, convex_hull(A.vertices + B.vertices))


def support(A: ConvexBody, u):
    """h_A(u) = max over x in A of <x, u>."""
    if A.dim == 1:
        u = u[0] if isinstance(u, (tuple, list)) else u
        return u * A.hi if u >= 0 else u * A.lo
    ux, uy = u
    return max(x * ux + y * uy for x, y in A.vertices)


# -- support-function suprema ------------------------------------------------

_AXES = ((1, 0), (0, 1), (-1, 0), (0, -1))


def _primitive(x, y):
    x, y = Fraction(x), Fraction(y)
    den = x.denominator * y.denominator // math.gcd(x.denominator, y.denominator)
    ix, iy = int(x * den), int(y * den)
    g = math.gcd(ix, iy)
    return (ix // g, iy // g)


class _Fan(NamedTuple):
    normals: dict          # primitive outward normal -> edge index
    fverts: tuple          # float vertices


@lru_cache(maxsize=65536)
def _fan(A: ConvexBody) -> _Fan:
    vs = A.vertices
    n = len(vs)
    normals = {}
    if n >= 2:
        for i in range(n):
            a, b = vs[i], vs[(i + 1) % n]
            normals[_primitive(b[1] - a[1], a[0] - b[0])] = i
    return _Fan(normals, tuple((float(x), float(y)) for x, y in vs))


def normal_fan(*bodies):
    """Sorted merged outward edge normals of planar bodies, plus the axes.

    Consecutive directions are less than pi apart, and every support
    function of the given bodies is linear on each arc between them.
    """
    dirs = set(_AXES)
    for A in bodies:
        dirs.update(_fan(A).normals)
    return sorted(dirs, key=_ANGLE_KEY)


def _sup1(pieces, const):
    best = None
    for u in (1, -1):
        total = const
        for p, q, A in pieces:
            h = A.hi if u == 1 else -A.lo
            total += (p if h >= 0 else q) * h
        if best is None or total > best:
            best = total
    return best


def _arc_max(w, s1, s2):
    wx, wy = w
    r = math.hypot(wx, wy)
    if r > 0.0:
        psi = math.atan2(wy, wx)
        psi = s1 + (psi - s1) % TWO_PI
        if psi <= s2:
            return r
    return max(wx * math.cos(s1) + wy * math.sin(s1), wx * math.cos(s2) + wy * math.sin(s2))


def _sup2(pieces, const):
    fans = [_fan(A) for _, _, A in pieces]
    dirs = set(_AXES)
    for f in fans:
        dirs.update(f.normals)
    dirs = sorted(dirs, key=_ANGLE_KEY)
    K = len(dirs)
    thetas = [math.atan2(d[1], d[0]) % TWO_PI for d in dirs]
    d0, d1 = dirs[0], dirs[1]
    mid = (d0[0] + d1[0], d0[1] + d1[1])
    active = []
    for _, _, A in pieces:
        vs = A.vertices
        active.append(max(range(len(vs)), key=lambda i: vs[i][0] * mid[0] + vs[i][1] * mid[1]))
    coefs = [(float(p), float(q)) for p, q, _ in pieces]
    best = -math.inf
    for k in range(K):
        if k > 0:
            dk = dirs[k]
            for j, f in enumerate(fans):
                e = f.normals.get(dk)
                if e is not None:
                    active[j] = (e + 1) % len(f.fverts)
        t1 = thetas[k]
        t2 = thetas[k + 1] if k + 1 < K else thetas[0] + TWO_PI
        cuts = [t1, t2]
        for j, (p, q) in enumerate(coefs):
            if p == q:
                continue
            ax, ay = fans[j].fverts[active[j]]
            if ax == 0.0 and ay == 0.0:
                continue
            phi = math.atan2(ay, ax)
            for z in (phi + math.pi / 2, phi - math.pi / 2):
                z = t1 + (z - t1) % TWO_PI
                if t1 < z < t2:
                    cuts.append(z)
        cuts.sort()
        for s1, s2 in zip(cuts, cuts[1:]):
            sm = 0.5 * (s1 + s2)
            cu, su = math.cos(sm), math.sin(sm)
            wx = wy = 0.0
            for j, (p, q) in enumerate(coefs):
                ax, ay = fans[j].fverts[active[j]]
                c = p if ax * cu + ay * su >= 0.0 else q
                wx += c * ax
                wy += c * ay
            v = _arc_max((wx, wy), s1, s2)
            if v > best:
                best = v
    return best + float(const)


def support_sup(pieces, const=0, dim=None):
    """sup over unit directions u of  const + sum_i g_i(h_{A_i}(u)),

    where each piece ``(p, q, A)`` contributes ``p*h`` when ``h >= 0`` and
    ``q*h`` otherwise.  ``p == q`` gives an ordinary linear term; ``(w, -w)``
    gives ``w*|h|``.  Exact for intervals.  For polygons, the sphere is cut
    into arcs on which every support function is linear and every sign is
    fixed, and each arc is maximized in closed form.
    """
    pieces = [(p, q, A) for p, q, A in pieces if p != 0 or q != 0]
    if dim is None:
        if not pieces:
            raise ValueError("dimension needed when there are no terms")
        dim = pieces[0][2].dim
    if any(A.dim != dim for _, _, A in pieces):
        raise DimMismatch("mixed dimensions in support_sup")
    if dim == 1:
        return _sup1(pieces, const)
    if not pieces:
        return float(const)
    return _sup2(pieces, const)


@dataclass(frozen=True)
class SupportFn:
    """A continuous function on the unit sphere S^{dim-1}:

        u  ->  const + sum(coef * h_A(u) for coef, A in terms)

    Images of bodies have a single term with coefficient 1.  Linear
    combinations with real (possibly negative) coefficients are kept
    symbolically so that sup-norms stay computable in closed form.
    """

    dim: int
    terms: tuple = ()
    const: object = 0

    @classmethod
    def unit(cls, dim: int) -> SupportFn:
        """The constant function 1 (support function of the unit ball)."""
        return cls(dim, (), Fraction(1))

    @classmethod
    def zero(cls, dim: int) -> SupportFn:
        return cls(dim, (), Fraction(0))

    def __call__(self, u):
        """Value at a direction: a real for dim 1, an angle or a vector for dim 2."""
        if self.dim == 2 and isinstance(u, Real):
            u = (math.cos(u), math.sin(u))
        return self.const + sum(c * support(A, u) for c, A in self.terms)

    def _combine(self, other, sign):
        if isinstance(other, SupportFn):
            if other.dim != self.dim:
                raise DimMismatch(f"dimension {self.dim} vs {other.dim}")
            acc = {}
            for c, A in self.terms:
                acc[A] = acc.get(A, 0) + c
            for c, A in other.terms:
                acc[A] = acc.get(A, 0) + sign * c
            terms = tuple((c, A) for A, c in acc.items() if c != 0)
            return SupportFn(self.dim, terms, self.const + sign * other.const)
        if isinstance(other, Real):
            return SupportFn(self.dim, self.terms, self.const + sign * other)
        return NotImplemented

    def __add__(self, other):
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self * -1

    def __mul__(self, r):
        if not isinstance(r, Real):
            return NotImplemented
        if r == 0:
            return SupportFn.zero(self.dim)
        return SupportFn(self.dim, tuple((r * c, A) for c, A in self.terms), r * self.const)

    __rmul__ = __mul__

    def sup(self):
        return support_sup([(c, c, A) for c, A in self.terms], self.const, self.dim)

    def inf(self):
        return -(-self).sup()

    def norm(self):
        """Sup-norm over the unit sphere."""
        return max(self.sup(), (-self).sup())

    def directions(self):
        """A finite direction set on which comparisons of the terms are decided:
        (+1, -1) for dim 1, the merged normal fan for dim 2."""
        if self.dim == 1:
            return (1, -1)
        return tuple(normal_fan(*(A for _, A in self.terms)))

    def values(self, directions=None):
        dirs = self.directions() if directions is None else directions
        if self.dim == 1:
            return tuple(self(u) for u in dirs)
        out = []
        for d in dirs:
            n = math.hypot(d[0], d[1])
            out.append(float(self((d[0] / n, d[1] / n))))
        return tuple(out)


def embed(A: ConvexBody) -> SupportFn:
    """The isometric embedding A -> h_A."""
    return SupportFn(A.dim, ((Fraction(1), A),), Fraction(0))


def sup_distance(F: SupportFn, G: SupportFn):
    return (F - G).norm()


class Limit(NamedTuple):
    body: ConvexBody
    distances: tuple


def increasing_limit(seq, K: ConvexBody, tol: float = DEFAULT_TOL) -> Limit:
    """Limit of an increasing sequence of bodies contained in ``K``.

    Returns the hull of the union together with the distances
    h(A_n, J), which are checked to decrease to 0.
    """
    seq = list(seq)
    if not seq:
        raise EmptyBody("empty sequence")
    for n, A in enumerate(seq):
        if not contains(K, A):
            raise UnboundedSequence(f"element {n} is not contained in the bound")
        if n and not contains(A, seq[n - 1]):
            raise NotIncreasing(f"element {n - 1} is not contained in element {n}")
    J = seq[0]
    for A in seq[1:]:
        J = hull_union(J, A)
    dists = tuple(hausdorff(A, J, tol) for A in seq)
    for a, b in zip(dists, dists[1:]):
        if b > a + (0 if K.dim == 1 else tol):
            raise InternalCheckFailed("distances to the limit increased")
    if dists[-1] > (0 if K.dim == 1 else tol):
        raise InternalCheckFailed("last element differs from the limit")
    return Limit(J, dists)

import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gouldrn import convex
from gouldrn.convex import (
    ConvexBody, embed, excess, hausdorff, hausdorff_excess, hull_union,
    interval, minkowski_sum, mk_body, norm_h, polygon, scale,
)
from gouldrn.errors import DimMismatch, EmptyBody, NegativeScale, NotIncreasing, UnboundedSequence

Q = st.fractions(min_value=-4, max_value=4, max_denominator=4)
pts2 = st.lists(st.tuples(Q, Q), min_size=1, max_size=6)
bodies1 = st.tuples(Q, Q).map(lambda t: interval(min(t), max(t)))
bodies2 = pts2.map(polygon)
bodies = st.one_of(bodies1, bodies2)
pairs = st.one_of(st.tuples(bodies1, bodies1), st.tuples(bodies2, bodies2))
nonneg = st.fractions(min_value=0, max_value=3, max_denominator=4)


def tol_for(A):
    return 0 if A.dim == 1 else 1e-9


def hull_oracle(points):
    """Vertices of the hull: points not in the closed convex hull of the others,
    decided by checking every triangle (and segment) of the remaining points."""
    pts = sorted(set(points))

    def in_tri(p, a, b, c):
        if c != b and convex._cross(a, b, c) == 0:
            return False
        d1 = convex._cross(a, b, p)
        d2 = convex._cross(b, c, p)
        d3 = convex._cross(c, a, p)
        return not ((d1 < 0 or d2 < 0 or d3 < 0) and (d1 > 0 or d2 > 0 or d3 > 0))

    out = []
    for p in pts:
        others = [q for q in pts if q != p]
        inside = any(in_tri(p, a, b, c) for a, b, c in itertools.combinations(others, 3))
        inside = inside or any(convex._cross(a, b, p) == 0 and min(a, b) < p < max(a, b)
                               for a, b in itertools.combinations(others, 2))
        if not inside:
            out.append(p)
    return set(out)


# -- construction -------------------------------------------------------------


def test_mk_body_single_point():
    assert mk_body([(0, 0)]).vertices == ((0, 0),)


def test_mk_body_drops_interior_point():
    B = mk_body([(0, 0), (1, 0), (0, 1), (Fraction(1, 4), Fraction(1, 4))])
    assert set(B.vertices) == {(0, 0), (1, 0), (0, 1)}
    assert len(B.vertices) == 3


def test_empty_inputs():
    with pytest.raises(EmptyBody):
        interval(2, 1)
    with pytest.raises(EmptyBody):
        mk_body([])


@given(pts2)
def test_hull_matches_oracle(points):
    B = polygon(points)
    assert set(B.vertices) == hull_oracle([tuple(map(Fraction, p)) for p in points])


def test_json_round_trip():
    for B in (interval(Fraction(-1, 3), 2), polygon([(0, 0), (1, Fraction(1, 2)), (0, 2)])):
        assert ConvexBody.from_json(B.to_json()) == B


# -- Minkowski sums and scaling ------------------------------------------------


def test_minkowski_intervals():
    assert minkowski_sum(interval(0, 1), interval(2, 3)) == interval(2, 4)


def test_minkowski_squares():
    sq = polygon([(0, 0), (1, 0), (1, 1), (0, 1)])
    assert minkowski_sum(sq, sq) == polygon([(0, 0), (2, 0), (2, 2), (0, 2)])


@given(bodies)
def test_minkowski_zero_identity(A):
    assert minkowski_sum(A, convex.zero(A.dim)) == A


@given(bodies2, bodies2)
def test_minkowski_matches_vertex_sums(A, B):
    brute = polygon([(a[0] + b[0], a[1] + b[1]) for a in A.vertices for b in B.vertices])
    assert minkowski_sum(A, B) == brute


@given(pairs, bodies)
def test_minkowski_algebra(AB, C):
    A, B = AB
    assert minkowski_sum(A, B) == minkowski_sum(B, A)
    if C.dim == A.dim:
        assert minkowski_sum(minkowski_sum(A, B), C) == minkowski_sum(A, minkowski_sum(B, C))


def test_dim_mismatch():
    with pytest.raises(DimMismatch):
        minkowski_sum(interval(0, 1), convex.zero(2))
    with pytest.raises(DimMismatch):
        hausdorff(interval(0, 1), convex.zero(2))


def test_scale():
    tri = polygon([(0, 0), (1, 0), (0, 1)])
    half = Fraction(1, 2)
    assert scale(half, tri).vertices == tuple((half * x, half * y) for x, y in tri.vertices)
    assert scale(0, tri) == convex.zero(2)
    assert scale(2, interval(1, 3)) == interval(2, 6)
    with pytest.raises(NegativeScale):
        scale(-1, tri)


# -- distances -----------------------------------------------------------------


def test_small_distances():
    assert excess(interval(0, 3), interval(0, 1)) == 2
    assert hausdorff(interval(0, 1), interval(0, 2)) == 1
    assert norm_h(convex.zero(2)) == 0
    assert norm_h(interval(-2, 3)) == 3
    assert norm_h(polygon([(0, 0), (1, 0), (1, 1), (0, 1)])) == pytest.approx(math.sqrt(2), abs=1e-15)


@given(pairs)
def test_excess_zero_on_subset(AB):
    A, B = AB
    J = hull_union(A, B)
    assert excess(A, J) == 0
    assert hausdorff(A, J) == pytest.approx(excess(J, A), abs=1e-9)


def _float_distances(samples, B):
    """Distance from each sample to polygon B (numpy, independent of the library)."""
    P = np.asarray(samples)
    V = np.array([(float(x), float(y)) for x, y in B.vertices])
    W = np.roll(V, -1, axis=0)
    D = W - V
    L = np.maximum((D ** 2).sum(axis=1), 1e-300)
    t = np.clip(((P[:, None, :] - V) * D).sum(axis=2) / L, 0, 1)
    near = V + t[..., None] * D
    dist = np.sqrt(((P[:, None, :] - near) ** 2).sum(axis=2)).min(axis=1)
    if len(V) >= 3:
        cross = D[:, 0] * (P[:, None, 1] - V[:, 1]) - D[:, 1] * (P[:, None, 0] - V[:, 0])
        dist[(cross >= 0).all(axis=1)] = 0.0
    return dist


def test_excess_matches_boundary_sampling():
    rng = random.Random(5)
    for _ in range(20):
        A = polygon([(rng.uniform(-3, 3), rng.uniform(-3, 3)) for _ in range(5)])
        B = polygon([(rng.uniform(-3, 3), rng.uniform(-3, 3)) for _ in range(5)])
        V = np.array([(float(x), float(y)) for x, y in A.vertices])
        W = np.roll(V, -1, axis=0)
        t = np.linspace(0, 1, 10**4 // len(V) + 1)[:, None, None]
        samples = (V + t * (W - V)).reshape(-1, 2)
        sampled = _float_distances(samples, B).max()
        assert abs(sampled - excess(A, B)) <= 1e-6


@given(pairs)
def test_hausdorff_two_forms(AB):
    A, B = AB
    assert abs(hausdorff(A, B) - hausdorff_excess(A, B)) <= tol_for(A)


@given(pairs, bodies)
def test_metric_axioms(AB, C):
    A, B = AB
    t = tol_for(A)
    assert hausdorff(A, A) == 0
    assert abs(hausdorff(A, B) - hausdorff(B, A)) <= t
    assert (hausdorff(A, B) <= t) == (A == B)
    if C.dim == A.dim:
        assert hausdorff(A, C) <= hausdorff(A, B) + hausdorff(B, C) + t


@given(pairs, Q, Q)
def test_translation_invariance(AB, x, y):
    A, B = AB
    c = x if A.dim == 1 else (x, y)
    shifted = hausdorff(convex.translate(A, c), convex.translate(B, c))
    assert abs(shifted - hausdorff(A, B)) <= tol_for(A)


@given(bodies2, st.tuples(Q, Q), st.tuples(Q, Q))
def test_distance_lipschitz(A, p, q):
    gap = abs(convex.point_distance(p, A) - convex.point_distance(q, A))
    assert gap <= math.hypot(p[0] - q[0], p[1] - q[1]) + 1e-12


@given(pts2, bodies2)
def test_excess_of_hull(points, A):
    P = polygon(points)
    by_points = max(convex.point_distance(p, A) for p in points)
    assert abs(by_points - excess(P, A)) <= 1e-9


# -- embedding -------------------------------------------------------------------


def test_embed_interval_values():
    U = embed(interval(-2, 5))
    assert U(1) == 5 and U(-1) == 2


@given(pairs)
def test_embedding_isometry(AB):
    A, B = AB
    assert abs(hausdorff(A, B) - (embed(A) - embed(B)).norm()) <= tol_for(A)


@given(pairs, nonneg, nonneg)
def test_embedding_linear(AB, a, b):
    A, B = AB
    lhs = embed(minkowski_sum(scale(a, A), scale(b, B)))
    rhs = embed(A) * a + embed(B) * b
    assert (lhs - rhs).norm() <= tol_for(A)
    dirs = lhs.directions() if A.dim == 1 else convex.normal_fan(A, B)
    for u in dirs:
        if A.dim == 2:
            n = math.hypot(*u)
            u = (u[0] / n, u[1] / n)
        assert abs(lhs(u) - rhs(u)) <= 1e-12


@given(pairs)
def test_embedding_hull_is_max(AB):
    A, B = AB
    J = hull_union(A, B)
    dirs = (1, -1) if A.dim == 1 else [(float(x), float(y)) for x, y in convex.normal_fan(A, B, J)]
    for u in dirs:
        assert abs(convex.support(J, u) - max(convex.support(A, u), convex.support(B, u))) <= 1e-12


def test_unit_support_function():
    U = convex.SupportFn.unit(2)
    assert U.norm() == 1
    assert (embed(convex.zero(2)) - U).norm() == 1


# -- increasing limits ------------------------------------------------------------


def test_increasing_limit_constant():
    A = interval(0, 1)
    lim = convex.increasing_limit([A, A, A], A)
    assert lim.body == A and lim.distances == (0, 0, 0)


def test_increasing_limit_intervals():
    seq = [interval(0, 1 - Fraction(1, n)) for n in range(1, 11)]
    lim = convex.increasing_limit(seq, interval(0, 1))
    assert lim.body == seq[-1]
    assert list(lim.distances) == sorted(lim.distances, reverse=True)
    assert lim.distances[-1] == 0


def test_increasing_limit_regular_polygons():
    # 3-, 6-, 12-, 24-gons sharing vertices, rationalized on the unit circle
    def gon(k):
        return [(Fraction(math.cos(2 * math.pi * i / k)).limit_denominator(10**6),
                 Fraction(math.sin(2 * math.pi * i / k)).limit_denominator(10**6)) for i in range(k)]

    seq = []
    pts = []
    for k in (3, 6, 12, 24):
        pts = pts + gon(k)
        seq.append(polygon(pts))
    K = polygon([(-2, -2), (2, -2), (2, 2), (-2, 2)])
    lim = convex.increasing_limit(seq, K)
    assert lim.body == seq[-1]
    assert all(b <= a + 1e-9 for a, b in zip(lim.distances, lim.distances[1:]))


def test_increasing_limit_errors():
    with pytest.raises(NotIncreasing):
        convex.increasing_limit([interval(0, 2), interval(0, 1)], interval(0, 3))
    with pytest.raises(UnboundedSequence):
        convex.increasing_limit([interval(0, 1), interval(0, 5)], interval(0, 3))

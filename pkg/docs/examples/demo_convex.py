"""Convex bodies: Minkowski sums, the Hausdorff distance and the embedding
into support functions.

    python docs/examples/demo_convex.py
"""
from fractions import Fraction

from gouldrn.convex import embed, hausdorff, interval, minkowski_sum, norm_h, polygon

A = interval(-1, 2)
B = interval(Fraction(1, 2), 3)
print("A =", A.to_json(), " B =", B.to_json())
print("A + B =", minkowski_sum(A, B).to_json())
print("h(A, B) =", hausdorff(A, B))

T = polygon([(0, 0), (1, 0), (0, 1)])
S = polygon([(0, 0), (1, 0), (1, 1), (0, 1)])
print("triangle + square has vertices", [(str(x), str(y)) for x, y in minkowski_sum(T, S).vertices])
print("h(triangle, square) =", hausdorff(T, S))
print("|square| =", norm_h(S))

# the embedding is an isometry: sup-distance of support functions equals h
d = (embed(T) - embed(S)).norm()
print("sup |h_T - h_S| over directions =", d)

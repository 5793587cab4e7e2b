"""Seeded random bodies, spaces, set functions and integrands.

Everything takes a :class:`random.Random` so runs are reproducible.
"""
from __future__ import annotations

import random
from fractions import Fraction

from . import convex
from .convex import ConvexBody
from .gould import Integrand
from .setfn import MultiSetFn, ScalarSetFn
from .space import FiniteSpace, MSet, bits


def rational(rng: random.Random, lo=-4, hi=4, den=4) -> Fraction:
    return Fraction(rng.randint(lo * den, hi * den), den)


def body(rng: random.Random, dim: int, origin: bool = False, max_pts: int = 5) -> ConvexBody:
    """A random interval or polygon (degenerate ones included).  With
    ``origin=True`` the body contains 0."""
    if dim == 1:
        a, b = rational(rng), rational(rng)
        lo, hi = min(a, b), max(a, b)
        if origin:
            lo, hi = min(lo, 0), max(hi, 0)
        return convex.interval(lo, hi)
    k = rng.randint(1, max_pts)
    pts = [(rational(rng), rational(rng)) for _ in range(k)]
    if origin:
        pts.append((0, 0))
    return convex.mk_body(pts)


def space(rng: random.Random, n_atoms: int, max_size: int = 2) -> FiniteSpace:
    return FiniteSpace.from_sizes([rng.randint(1, max_size) for _ in range(n_atoms)])


def scalar_table(rng: random.Random, sp: FiniteSpace, lo=0, hi=6) -> ScalarSetFn:
    """Arbitrary nonnegative table (typically neither monotone nor subadditive)."""
    table = {0: Fraction(0)}
    for m in range(1, sp.full_mask + 1):
        table[m] = Fraction(rng.randint(lo, hi * 2), 2)
    return ScalarSetFn(sp, table)


def scalar_additive(rng: random.Random, sp: FiniteSpace, null_prob: float = 0.2) -> ScalarSetFn:
    vals = [Fraction(0) if rng.random() < null_prob else Fraction(rng.randint(1, 8), 2) for _ in range(sp.n_atoms)]
    return ScalarSetFn.additive(sp, vals)


def scalar_submeasure(rng: random.Random, sp: FiniteSpace) -> ScalarSetFn:
    """min(lambda(E), cap) or max over atoms: monotone and subadditive."""
    w = [Fraction(rng.randint(0, 8), 2) for _ in range(sp.n_atoms)]
    if rng.random() < 0.5:
        cap = Fraction(rng.randint(1, 12), 2)
        return ScalarSetFn.from_function(sp, lambda E: min(sum((w[i] for i in E), Fraction(0)), cap))
    return ScalarSetFn.from_function(sp, lambda E: max((w[i] for i in E), default=Fraction(0)))


def scalar_any(rng: random.Random, sp: FiniteSpace) -> ScalarSetFn:
    kind = rng.choice(["table", "additive", "submeasure"])
    if kind == "table":
        return scalar_table(rng, sp)
    if kind == "additive":
        return scalar_additive(rng, sp)
    return scalar_submeasure(rng, sp)


def multi_additive(rng: random.Random, sp: FiniteSpace, dim: int, origin: bool = True, null_prob: float = 0.1) -> MultiSetFn:
    bodies = [convex.zero(dim) if rng.random() < null_prob else body(rng, dim, origin) for _ in range(sp.n_atoms)]
    return MultiSetFn.additive(sp, bodies)


def multisubmeasure(rng: random.Random, sp: FiniteSpace, dim: int) -> MultiSetFn:
    """A strictly subadditive multisubmeasure: the hull of the atom bodies in
    E plus min(count(E), cap) times a fixed body, everything containing 0."""
    K = [body(rng, dim, origin=True) for _ in range(sp.n_atoms)]
    B = body(rng, dim, origin=True)
    cap = rng.randint(1, max(1, sp.n_atoms))
    use_hull = rng.random() < 0.7

    def fn(E: MSet):
        out = convex.zero(dim)
        if use_hull:
            for i in E:
                out = convex.hull_union(out, K[i])
        return convex.minkowski_sum(out, convex.scale(min(len(E), cap), B))

    return MultiSetFn.from_function(sp, fn)


def integrand(rng: random.Random, sp: FiniteSpace, nonneg: bool = False, simple_prob: float = 0.3) -> Integrand:
    lo = 0 if nonneg else -3
    if rng.random() < simple_prob:
        return Integrand.from_atoms(sp, [rational(rng, lo, 3) for _ in range(sp.n_atoms)])
    vals = []
    for a in sp.atoms:
        base = rational(rng, lo, 3)
        for _ in a:
            vals.append(base if rng.random() < 0.5 else rational(rng, lo, 3))
    return Integrand(sp, tuple(vals))


def integrable_integrand(rng: random.Random, sp: FiniteSpace, m, nonneg: bool = False) -> Integrand:
    """Random integrand that may oscillate only on atoms where m vanishes."""
    lo = 0 if nonneg else -3
    vals = []
    for i, a in enumerate(sp.atoms):
        base = rational(rng, lo, 3)
        null = m.norm(1 << i) == 0
        for _ in a:
            vals.append(rational(rng, lo, 3) if null else base)
    return Integrand(sp, tuple(vals))


def dyadic_chain(sp: FiniteSpace):
    """Partitions of T halving blocks until atoms are reached."""
    from .space import Partition

    level = [sp.full_mask]
    chain = [Partition.from_masks(sp, level)]
    while any(bin(b).count("1") > 1 for b in level):
        nxt = []
        for b in level:
            idx = bits(b)
            if len(idx) == 1:
                nxt.append(b)
                continue
            half = len(idx) // 2
            nxt.append(sum(1 << i for i in idx[:half]))
            nxt.append(sum(1 << i for i in idx[half:]))
        level = nxt
        chain.append(Partition.from_masks(sp, level))
    return chain


def rn_pair(rng: random.Random, sp: FiniteSpace, dim: int, den: int = 4, max_s: int = 12):
    """Additive M with bodies containing 0 and Gamma(E) = sum over atoms of
    s_a M({a}); returns (Gamma, M, s)."""
    bodies = []
    for _ in range(sp.n_atoms):
        B = body(rng, dim, origin=True)
        while B.is_zero():
            B = body(rng, dim, origin=True)
        bodies.append(B)
    M = MultiSetFn.additive(sp, bodies)
    s = [Fraction(rng.randint(0, max_s), den) for _ in range(sp.n_atoms)]
    G = MultiSetFn.additive(sp, [convex.scale(c, M(1 << i)) for i, c in enumerate(s)])
    return G, M, s

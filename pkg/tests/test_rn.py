import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gouldrn import convex, generators
from gouldrn.convex import interval, polygon, scale
from gouldrn.errors import HypothesisFailed, NoExhaustion
from gouldrn.gould import Integrand, integral_measure
from gouldrn.rn import (
    RangeEngine, approximate_range, check_exhaustive_hypothesis, rn_derive,
    stages_needed, transfer_holds, verify_rn,
)
from gouldrn.setfn import MultiSetFn, check_null_difference, strong_ac_constant, variation
from gouldrn.space import FiniteSpace, MSet

seeds = st.integers(0, 10**9)


def subsets_of(m):
    return [s for s in range(1, m + 1) if s & ~m == 0]


def grid_range(G, M, E, alpha, step=1e-4, top=None):
    """Feasible r on a grid in [0, top].  In the plane the support functions
    are sampled at 2048 even directions plus the normals of both bodies."""
    top = top if top is not None else 1 + 2 * float(strong_ac_constant(G, M))
    r = np.arange(0.0, top + step, step)
    ok = np.ones_like(r, dtype=bool)
    for H in subsets_of(E):
        c = float(alpha * variation(M, H))
        if M.dim == 1:
            g = np.maximum(np.abs(float(G(H).lo) - r * float(M(H).lo)), np.abs(float(G(H).hi) - r * float(M(H).hi)))
        else:
            normals = convex.normal_fan(G(H), M(H))
            extra = [np.arctan2(float(d[1]), float(d[0])) for d in normals]
            theta = np.concatenate([np.linspace(0, 2 * np.pi, 2048, endpoint=False), extra])
            U = np.stack([np.cos(theta), np.sin(theta)], axis=1)
            hG = (U @ np.array(G(H).vertices, dtype=float).T).max(axis=1)
            hM = (U @ np.array(M(H).vertices, dtype=float).T).max(axis=1)
            g = np.empty_like(r)
            for i in range(0, len(r), 500):
                blk = r[i:i + 500, None]
                g[i:i + 500] = np.abs(hG[None, :] - blk * hM[None, :]).max(axis=1)
        ok &= g <= c + 1e-12
    return r[ok]


def three_atom_case(dim):
    sp = FiniteSpace.discrete(3)
    if dim == 1:
        M = MultiSetFn.additive(sp, [interval(0, 1), interval(-1, 2), interval(0, 2)])
        G = MultiSetFn.additive(sp, [interval(0, Fraction(5, 4)), interval(-1, Fraction(9, 4)), interval(0, 2)])
    else:
        M = MultiSetFn.additive(sp, [polygon([(0, 0), (1, 0), (0, 1)]), polygon([(0, 0), (1, 1)]),
                                     polygon([(-1, 0), (1, 0), (0, 1)])])
        G = MultiSetFn.additive(sp, [polygon([(0, 0), (Fraction(5, 4), 0), (0, 1)]), polygon([(0, 0), (1, 1)]),
                                     polygon([(-1, 0), (1, 0), (0, Fraction(6, 5))])])
    return sp, G, M


# -- approximate ranges ------------------------------------------------------------


@pytest.mark.parametrize("dim", [1, 2])
def test_scalar_multiple_in_range(dim):
    rng = random.Random(dim)
    sp = generators.space(rng, 3)
    M = generators.multi_additive(rng, sp, dim)
    c = Fraction(7, 4)
    G = M.scaled(c)
    for alpha in (Fraction(0), Fraction(1, 8), Fraction(1)):
        for E in range(1, sp.full_mask + 1):
            assert c in approximate_range(G, M, E, alpha)


@pytest.mark.parametrize("dim", [1, 2])
def test_range_matches_grid(dim):
    sp, G, M = three_atom_case(dim)
    alpha = Fraction(1, 4)
    for E in range(1, 8):
        R = approximate_range(G, M, E, alpha)
        grid = grid_range(G, M, E, alpha)
        if R.empty:
            assert grid.size == 0
            continue
        assert grid.size > 0
        assert abs(float(R.lo) - grid.min()) <= 1e-4
        assert abs(float(R.hi) - grid.max()) <= 1e-4


def test_exact_range_empty_for_subadditive():
    sp = FiniteSpace.discrete(2)
    M = MultiSetFn(sp, {0: interval(0, 0), 1: interval(0, 1), 2: interval(-1, 1), 3: interval(-1, 1)})
    assert M.flags.submeasure and not M.flags.additive
    M0 = integral_measure(M)
    R = approximate_range(M0, M, sp.full, Fraction(0))
    assert R.empty
    assert grid_range(M0, M, 3, Fraction(0), top=1 + 2 * float(strong_ac_constant(M0, M))).size == 0
    # single atoms keep an exact relation
    assert not approximate_range(M0, M, MSet(sp, 1), Fraction(0)).empty


@settings(max_examples=25)
@given(seeds)
def test_range_monotone(seed):
    rng = random.Random(seed)
    sp = generators.space(rng, rng.randint(1, 3))
    dim = 1 + seed % 2
    G, M, s = generators.rn_pair(rng, sp, dim)
    # perturb one atom so ranges are proper intervals
    G = MultiSetFn.additive(sp, [convex.hull_union(G(1 << i), scale(Fraction(1, 2), M(1 << i)))
                                 for i in range(sp.n_atoms)])
    engine = RangeEngine(G, M)
    a1, a2 = Fraction(1, 8), Fraction(1, 2)

    def inside(inner, outer):
        if inner is None:
            return True
        if outer is None:
            return False
        tol = 0 if dim == 1 else 1e-9
        hi_ok = outer[1] is None or (inner[1] is not None and inner[1] <= outer[1] + tol)
        return outer[0] <= inner[0] + tol and hi_ok

    for E in range(1, sp.full_mask + 1):
        assert inside(engine.bounds(E, a1), engine.bounds(E, a2))
        for F in subsets_of(E):
            assert inside(engine.bounds(E, a1), engine.bounds(F, a1))


@settings(max_examples=25)
@given(seeds)
def test_transfer_lemma(seed):
    rng = random.Random(seed)
    sp = generators.space(rng, rng.randint(1, 3))
    dim = 1 + seed % 2
    M = generators.multisubmeasure(rng, sp, dim)
    G = integral_measure(M).scaled(Fraction(rng.randint(1, 8), 4))
    for alpha in (Fraction(1, 4), Fraction(1)):
        for E in range(1, sp.full_mask + 1):
            assert transfer_holds(G, M, E, alpha)


@settings(max_examples=25)
@given(seeds)
def test_strong_ac_transfer(seed):
    rng = random.Random(seed)
    sp = generators.space(rng, rng.randint(1, 4))
    M = generators.multisubmeasure(rng, sp, 1 + seed % 2)
    G = integral_measure(M).scaled(Fraction(3, 2))
    assert abs(strong_ac_constant(G, M) - strong_ac_constant(G, integral_measure(M))) <= 1e-12


@settings(max_examples=20)
@given(seeds)
def test_null_difference_lemma(seed):
    rng = random.Random(seed)
    sp = generators.space(rng, rng.randint(1, 3))
    G, M, s = generators.rn_pair(rng, sp, 1 + seed % 2)
    # add a null atom so null differences exist
    sp2 = FiniteSpace.from_sizes([1] * (sp.n_atoms + 1))
    z = convex.zero(M.dim)
    M2 = MultiSetFn.additive(sp2, [M(1 << i) for i in range(sp.n_atoms)] + [z])
    G2 = MultiSetFn.additive(sp2, [G(1 << i) for i in range(sp.n_atoms)] + [z])
    engine = RangeEngine(G2, M2)
    for alpha in (Fraction(1, 16), Fraction(1, 2)):
        ok, pair = check_null_difference(M2.variation_measure, lambda F: engine.bounds(F.mask, alpha) is not None)
        assert ok, pair


# -- exhaustive hypothesis ------------------------------------------------------------


def test_exhaustive_examples():
    sp, G, M = three_atom_case(1)
    M0 = integral_measure(M)
    res = check_exhaustive_hypothesis(M0.scaled(2), M, Fraction(1, 4), sp.full)
    assert res.ok and [B.mask for B in res.exhaustion] == [1, 2, 4]
    s = [Fraction(1), Fraction(3), Fraction(1, 2)]
    Gs = MultiSetFn.additive(sp, [scale(c, M0(1 << i)) for i, c in enumerate(s)])
    for k in range(1, 12):
        assert check_exhaustive_hypothesis(Gs, M, Fraction(1, 2**k), sp.full).ok
    bad = MultiSetFn.additive(sp, [interval(0, 1), interval(-3, 1), interval(0, 2)])
    with pytest.raises(NoExhaustion) as info:
        check_exhaustive_hypothesis(bad, M, Fraction(1, 8), sp.full)
    assert info.value.alpha == Fraction(1, 8)


# -- the derivative -------------------------------------------------------------------


def test_stages_needed():
    assert stages_needed(Fraction(1, 10**6)) == 23
    assert stages_needed(Fraction(8)) == 1
    assert stages_needed(Fraction(4)) == 1
    assert stages_needed(Fraction(2)) == 2
    with pytest.raises(ValueError):
        stages_needed(0)


@pytest.mark.parametrize("dim", [1, 2])
def test_scalar_multiple(dim):
    rng = random.Random(10 + dim)
    sp = generators.space(rng, 3)
    G, M, _ = generators.rn_pair(rng, sp, dim)
    c = Fraction(5, 2)
    res = rn_derive(M.scaled(c), M)
    assert res.stages[0].values == tuple([c] * sp.n_atoms) or dim == 2
    assert all(abs(x - c) <= 1e-9 for x in res.derivative.atom_values())
    assert res.diagnostics["max_residual"] <= 1e-9


def test_recovers_known_derivative():
    sp = FiniteSpace.from_sizes([1, 2, 1])
    M = MultiSetFn.additive(sp, [interval(0, 1), interval(-1, 1), interval(0, Fraction(1, 2))])
    s = [Fraction(1), Fraction(2), Fraction(3)]
    G = MultiSetFn.additive(sp, [scale(c, M(1 << i)) for i, c in enumerate(s)])
    res = rn_derive(G, M)
    assert list(res.derivative.atom_values()) == s
    assert res.diagnostics["verified"] and res.diagnostics["max_residual"] == 0
    assert res.diagnostics["max_r"] <= res.diagnostics["r_bound"] == 1 + 2 * res.b
    rep = verify_rn(G, M, res.derivative)
    assert rep.ok and not rep.violations


def test_perturbation_is_reported():
    sp = FiniteSpace.discrete(3)
    M = MultiSetFn.additive(sp, [interval(0, 1), interval(0, 4), interval(0, 1)])
    s = [Fraction(1), Fraction(2), Fraction(1)]
    G = MultiSetFn.additive(sp, [scale(c, M(1 << i)) for i, c in enumerate(s)])
    f = Integrand.from_atoms(sp, [Fraction(1), Fraction(3), Fraction(1)])
    rep = verify_rn(G, M, f)
    assert not rep.ok
    assert "1" in rep.violations
    assert all("1" in key.split(",") for key in rep.violations)


def test_zero_measures():
    sp = FiniteSpace.discrete(2)
    z = MultiSetFn.additive(sp, [convex.zero(2), convex.zero(2)])
    f = Integrand.from_atoms(sp, [Fraction(3), Fraction(7)])
    rep = verify_rn(z, z, f)
    assert rep.ok and rep.max_residual == 0
    res = rn_derive(z, z)
    assert res.diagnostics["verified"]


def test_subadditive_measure():
    # Gamma = M_0 against a strictly subadditive M: f = 1 on non-null atoms
    rng = random.Random(4)
    sp = generators.space(rng, 3)
    M = generators.multisubmeasure(rng, sp, 1)
    assert not M.flags.additive
    res = rn_derive(integral_measure(M), M)
    for i, x in enumerate(res.derivative.atom_values()):
        if variation(M, 1 << i) > 0:
            assert x == 1
    assert res.diagnostics["verified"]


def test_hypothesis_failures():
    sp = FiniteSpace.discrete(2)
    M = MultiSetFn.additive(sp, [interval(0, 1), interval(0, 1)])
    sq = MultiSetFn.from_function(sp, lambda E: interval(0, len(E) ** 2))
    with pytest.raises(HypothesisFailed) as info:
        rn_derive(sq, M)
    assert info.value.reason == "additive"
    with pytest.raises(HypothesisFailed) as info:
        rn_derive(M, sq)
    assert info.value.reason == "multisubmeasure"
    N = MultiSetFn.additive(sp, [interval(0, 1), convex.zero(1)])
    with pytest.raises(HypothesisFailed) as info:
        rn_derive(M, N)
    assert info.value.reason == "b" and info.value.block.mask == 2
    tilted = MultiSetFn.additive(sp, [interval(0, 1), interval(-1, 1)])
    with pytest.raises(HypothesisFailed) as info:
        rn_derive(tilted, M)
    assert info.value.reason == "range-empty" and info.value.stage == 1


@settings(max_examples=15)
@given(seeds)
def test_round_trip_property(seed):
    rng = random.Random(seed)
    sp = generators.space(rng, rng.randint(1, 4))
    dim = 1 + seed % 2
    G, M, s = generators.rn_pair(rng, sp, dim)
    tol = Fraction(1, 1000)
    res = rn_derive(G, M, tol)
    assert max(abs(x - y) for x, y in zip(res.derivative.atom_values(), s)) <= Fraction(2) ** (3 - res.N)
    assert res.diagnostics["verified"]
    assert res.diagnostics["cauchy_ratio"] <= 1 + 1e-9

"""Radon-Nikodym derivatives of an additive Gamma with respect to a
multisubmeasure M, by exhaustion and approximate ranges.

The alpha-approximate range of Gamma on E is

    A(E, alpha) = { r >= 0 : h(Gamma(H), r M(H)) <= alpha v_M(H) for all H inside E }.

Each constraint g_H(r) = h(Gamma(H), r M(H)) is convex in r, so each
feasible set is an interval and A(E, alpha) is their intersection.
Intervals are exact rationals in dimension 1.  In dimension 2 the circle
is cut into arcs on which both support functions are linear, g_H is
evaluated in closed form on every arc, and the interval endpoints are
found by golden-section minimization followed by root bracketing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import convex
from .checks import within
from .convex import hausdorff, norm_h
from .errors import (
    HypothesisFailed,
    InternalCheckFailed,
    NoExhaustion,
    NotStronglyAC,
)
from .gould import Integrand, integral_measure, integrate
from .setfn import (
    EmbeddedSetFn,
    MultiSetFn,
    _variation_table,
    build_exhaustion,
    complete_exhaustion,
    is_zero,
    set_key,
    strong_ac_constant,
)
from .space import MSet, bits, submasks

RANGE_TOL = 1e-12


@dataclass
class ApproxRange:
    """The interval [lo, hi] (``hi is None`` means unbounded) or empty."""

    lo: object
    hi: object
    empty: bool
    slack: dict = field(default_factory=dict)

    def __contains__(self, r) -> bool:
        if self.empty or r < self.lo - _tol(self.lo):
            return False
        return self.hi is None or r <= self.hi + _tol(self.hi)

    def midpoint(self):
        if self.empty:
            raise ValueError("empty range has no midpoint")
        if self.hi is None:
            return self.lo
        return (self.lo + self.hi) / 2


def _tol(x):
    if isinstance(x, float):
        return RANGE_TOL * (1.0 + abs(x))
    return 0


def _intersect(a, b):
    """Intersect two intervals given as (lo, hi) with hi None for +inf; None is empty."""
    if a is None or b is None:
        return None
    lo = max(a[0], b[0])
    if a[1] is None:
        hi = b[1]
    elif b[1] is None:
        hi = a[1]
    else:
        hi = min(a[1], b[1])
    if hi is not None and hi < lo:
        if lo - hi <= _tol(lo):
            return (lo, lo)
        return None
    return (lo, hi)


def _linear_interval(a, p, c):
    """{r >= 0 : |a - r p| <= c}."""
    if p == 0:
        return (Fraction(0), None) if abs(a) <= c else None
    x, y = (a - c) / p, (a + c) / p
    if p < 0:
        x, y = y, x
    return _intersect((Fraction(0), None), (x, y))


class _Arcs:
    """Closed-form evaluation of r -> sup over the circle of |h_G - r h_M|."""

    def __init__(self, G: convex.ConvexBody, Mb: convex.ConvexBody):
        dirs = convex.normal_fan(G, Mb)
        K = len(dirs)
        A = np.empty((K, 2))
        B = np.empty((K, 2))
        t1 = np.empty(K)
        t2 = np.empty(K)
        th = [math.atan2(d[1], d[0]) % convex.TWO_PI for d in dirs]
        gv, mv = G.vertices, Mb.vertices
        for k in range(K):
            d0, d1 = dirs[k], dirs[(k + 1) % K]
            mid = (d0[0] / math.hypot(*d0) + d1[0] / math.hypot(*d1), d0[1] / math.hypot(*d0) + d1[1] / math.hypot(*d1))
            a = max(gv, key=lambda v: float(v[0]) * mid[0] + float(v[1]) * mid[1])
            b = max(mv, key=lambda v: float(v[0]) * mid[0] + float(v[1]) * mid[1])
            A[k] = (float(a[0]), float(a[1]))
            B[k] = (float(b[0]), float(b[1]))
            t1[k] = th[k]
            t2[k] = th[k + 1] if k + 1 < K else th[0] + convex.TWO_PI
        self.A, self.B, self.t1, self.t2 = A, B, t1, t2
        self.span = t2 - t1
        self.u1 = np.stack([np.cos(t1), np.sin(t1)], axis=1)
        self.u2 = np.stack([np.cos(t2), np.sin(t2)], axis=1)

    def __call__(self, r: float) -> float:
        W = self.A - r * self.B
        best = 0.0
        for s in (1.0, -1.0):
            w = s * W
            nrm = np.hypot(w[:, 0], w[:, 1])
            psi = np.arctan2(w[:, 1], w[:, 0])
            inside = np.mod(psi - self.t1, convex.TWO_PI) <= self.span
            ends = np.maximum(np.einsum("ij,ij->i", w, self.u1), np.einsum("ij,ij->i", w, self.u2))
            vals = np.where(inside & (nrm > 0), nrm, ends)
            best = max(best, float(vals.max()))
        return best


class _HData:
    """Per-set data for one constraint, independent of alpha."""

    def __init__(self, G, Mb, v):
        self.G, self.Mb, self.v = G, Mb, v
        self.dim = G.dim
        self.nG = norm_h(G)
        self.nM = norm_h(Mb)
        if self.dim == 2 and not Mb.is_zero():
            self.g = _Arcs(G, Mb)
            # g(r) >= r |M(H)| - |Gamma(H)| > g(0) beyond 2 |Gamma(H)| / |M(H)|
            R = 2.0 * float(self.nG) / float(self.nM) + 1.0
            # golden section: g is convex but has kinks, where Brent stalls
            res = minimize_scalar(self.g, bracket=(0.0, R), method="golden", options={"xtol": 1e-15})
            r0 = min(max(float(res.x), 0.0), R)
            if self.g(0.0) <= self.g(r0):
                r0 = 0.0
            self.rstar, self.gmin = r0, self.g(r0)
            # the closed form must agree with the Hausdorff distance itself
            rq = Fraction(r0).limit_denominator(10**9)
            direct = hausdorff(G, convex.scale(rq, Mb))
            if abs(direct - self.g(float(rq))) > 1e-9 * (1.0 + direct):
                raise InternalCheckFailed("arc evaluation disagrees with the Hausdorff distance")

    def value(self, r):
        """g_H(r) = h(Gamma(H), r M(H))."""
        if self.dim == 1:
            G, Mb = self.G, self.Mb
            return max(abs(G.lo - r * Mb.lo), abs(G.hi - r * Mb.hi))
        if self.Mb.is_zero():
            return self.nG
        return self.g(float(r))

    def interval(self, alpha):
        c = alpha * self.v
        if self.dim == 1:
            G, Mb = self.G, self.Mb
            return _intersect(_linear_interval(G.lo, Mb.lo, c), _linear_interval(G.hi, Mb.hi, c))
        level = float(c) + RANGE_TOL * (1.0 + float(self.nG) + float(self.nM))
        if self.Mb.is_zero():
            return (0.0, None) if self.nG <= level else None
        if self.gmin > level:
            return None
        g = self.g
        lo = 0.0 if g(0.0) <= level else brentq(lambda r: g(r) - level, 0.0, self.rstar, xtol=1e-15)
        R = (float(self.nG) + level + 1.0) / float(self.nM) + 1.0
        hi = brentq(lambda r: g(r) - level, self.rstar, R, xtol=1e-15)
        return (lo, hi)


class RangeEngine:
    """Approximate ranges of Gamma with respect to M, with per-set caches."""

    def __init__(self, Gamma: MultiSetFn, M: MultiSetFn, vtable=None):
        if Gamma.space != M.space or Gamma.dim != M.dim:
            raise ValueError("Gamma and M must share space and dimension")
        self.Gamma, self.M = Gamma, M
        self.v = vtable if vtable is not None else M.variation_table
        self._data = {}
        self._intervals = {}

    def data(self, H: int) -> _HData:
        d = self._data.get(H)
        if d is None:
            d = self._data[H] = _HData(self.Gamma(H), self.M(H), self.v[H])
        return d

    def interval(self, H: int, alpha):
        key = (H, alpha)
        if key not in self._intervals:
            self._intervals[key] = self.data(H).interval(alpha)
        return self._intervals[key]

    def bounds(self, E: int, alpha):
        """Intersection over every nonempty H inside E, or None when empty."""
        zero = Fraction(0) if self.M.dim == 1 else 0.0
        acc = (zero, None)
        for H in submasks(E):
            if H == 0:
                continue
            acc = _intersect(acc, self.interval(H, alpha))
            if acc is None:
                return None
        return acc

    def range(self, E: int, alpha, with_slack: bool = False) -> ApproxRange:
        b = self.bounds(E, alpha)
        if b is None:
            return ApproxRange(None, None, True)
        out = ApproxRange(b[0], b[1], False)
        if with_slack:
            r = out.midpoint()
            for H in submasks(E):
                if H:
                    out.slack[set_key(H)] = alpha * self.v[H] - self.data(H).value(r)
        return out


def approximate_range(Gamma: MultiSetFn, M: MultiSetFn, E, alpha, engine: RangeEngine | None = None) -> ApproxRange:
    """A_Gamma(E, alpha) with the slack of every constraint at the midpoint.

    The embedded formulation (sup-norm of U_Gamma(H) - r U_M(H)) is
    evaluated at the midpoint for every H and must match the direct one.
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    engine = engine or RangeEngine(Gamma, M)
    e = E if isinstance(E, int) else E.mask
    rng = engine.range(e, alpha, with_slack=True)
    if not rng.empty:
        r = rng.midpoint()
        rr = r if M.dim == 1 else Fraction(r)
        for H in submasks(e):
            if not H:
                continue
            direct = engine.data(H).value(r)
            emb = (convex.embed(Gamma(H)) - convex.embed(M(H)) * rr).norm()
            tol = 0 if M.dim == 1 else 1e-9 * (1.0 + direct)
            if abs(direct - emb) > tol:
                raise InternalCheckFailed("direct and embedded range constraints disagree")
    return rng


@dataclass
class ExhaustiveCheck:
    ok: bool
    exhaustion: list
    alpha: object


def check_exhaustive_hypothesis(Gamma, M, alpha, E, engine=None, prefer: str = "fine") -> ExhaustiveCheck:
    """Exhaust E (with respect to v_M) by sets with nonempty alpha-approximate range."""
    engine = engine or RangeEngine(Gamma, M)
    e = E if isinstance(E, int) else E.mask
    vM = M.variation_measure
    if is_zero(vM(e)):
        raise ValueError("the exhaustive hypothesis concerns sets with v_M(E) > 0")
    try:
        exh = build_exhaustion(vM, MSet(M.space, e), lambda F: engine.bounds(F.mask, alpha) is not None, prefer=prefer)
    except NoExhaustion as exc:
        raise NoExhaustion(str(exc) + f" at alpha={alpha}", block=exc.block, alpha=alpha) from None
    return ExhaustiveCheck(True, exh, alpha)


# -- the derivative ------------------------------------------------------------


@dataclass
class StageBlock:
    block: MSet
    r: object
    lo: object
    hi: object


@dataclass
class Stage:
    n: int
    alpha: Fraction
    blocks: list
    values: tuple  # f_n on atoms


@dataclass
class RnResult:
    derivative: Integrand
    stages: list
    b: object
    N: int
    diagnostics: dict

    @property
    def approximants(self) -> list:
        return [s.values for s in self.stages]

    def to_json(self) -> dict:
        from .checks import jsonable

        return {
            "b": jsonable(self.b),
            "N": self.N,
            "derivative": jsonable(list(self.derivative.atom_values())),
            "stages": [
                {
                    "n": s.n,
                    "alpha": jsonable(s.alpha),
                    "blocks": [
                        {"set": blk.block.key(), "r": jsonable(blk.r), "lo": jsonable(blk.lo), "hi": jsonable(blk.hi)}
                        for blk in s.blocks
                    ],
                }
                for s in self.stages
            ],
            "diagnostics": jsonable(self.diagnostics),
        }


def stages_needed(tol) -> int:
    """Smallest n >= 1 with 2^(3-n) <= tol."""
    tol = Fraction(tol) if not isinstance(tol, Fraction) else tol
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = 1
    while Fraction(2) ** (3 - n) > tol:
        n += 1
    return n


def _check_hypotheses(Gamma, M):
    if Gamma.space != M.space or Gamma.dim != M.dim:
        raise HypothesisFailed("multisubmeasure", "Gamma and M must share space and dimension")
    if not Gamma.flags.additive:
        raise HypothesisFailed("additive", f"Gamma is not additive (witness {Gamma.flags.witnesses.get('additive')})")
    if not M.flags.submeasure:
        raise HypothesisFailed("multisubmeasure", "M is not monotone and subadditive")
    try:
        return strong_ac_constant(Gamma, M)
    except NotStronglyAC as exc:
        raise HypothesisFailed("b", str(exc), block=exc.witness) from None


def rn_derive(Gamma: MultiSetFn, M: MultiSetFn, tol=Fraction(1, 10**6), verify: bool = True) -> RnResult:
    """Staged construction of f with Gamma(E) = integral over E of f dM.

    Stage n uses alpha = 2^-n: every block of the previous stage is
    exhausted (largest blocks first) by sets with nonempty range, the null
    residual is folded into the first set, and each set gets the midpoint
    of its range.  The run stops at the first N with 2^(3-N) <= tol.
    """
    space = M.space
    b = _check_hypotheses(Gamma, M)
    vtab = M.variation_table
    # the variation of the embedded set function is computed independently
    emb = _variation_table(EmbeddedSetFn(M))
    for e in range(space.full_mask + 1):
        t = 0 if M.dim == 1 else 1e-9 * (1.0 + float(vtab[e]))
        if abs(vtab[e] - emb[e]) > t:
            raise InternalCheckFailed(f"v_M and the embedded variation differ on {set_key(e)}")
    vM = M.variation_measure
    engine = RangeEngine(Gamma, M, vtab)
    engine0 = RangeEngine(Gamma, integral_measure(M), vtab)
    N = stages_needed(tol)
    rmax = 1 + 2 * b
    exact = M.dim == 1
    zero = Fraction(0) if exact else 0.0
    blocks = [space.full_mask] if not is_zero(vtab[space.full_mask]) else []
    stages = []
    max_r = zero
    transfer_ok = True
    for n in range(1, N + 1):
        alpha = Fraction(1, 2**n)
        new_blocks = []
        for B in blocks:
            try:
                exh = build_exhaustion(
                    vM, MSet(space, B), lambda F: engine.bounds(F.mask, alpha) is not None, prefer="coarse"
                )
            except NoExhaustion:
                for i in bits(B):
                    if not is_zero(vtab[1 << i]) and engine.bounds(1 << i, alpha) is None:
                        raise HypothesisFailed(
                            "range-empty",
                            f"the approximate range of atom {i} is empty at alpha={alpha} (stage {n})",
                            block=MSet(space, 1 << i), alpha=alpha, stage=n,
                        ) from None
                raise HypothesisFailed(
                    "exhaustion", f"no exhaustion of {set_key(B)} at alpha={alpha} (stage {n})",
                    block=MSet(space, B), alpha=alpha, stage=n,
                ) from None
            for F in complete_exhaustion(exh, MSet(space, B), vM):
                lo, hi = engine.bounds(F.mask, alpha)
                r = (lo + hi) / 2 if hi is not None else lo
                r = min(max(r, zero), rmax)
                if abs(r) > rmax + _tol(float(rmax) if not exact else rmax):
                    raise InternalCheckFailed("stage value exceeds 1+2b")
                if engine0.bounds(F.mask, alpha) is None or not _inside(r, engine0.bounds(F.mask, alpha)):
                    transfer_ok = False
                max_r = max(max_r, abs(r))
                new_blocks.append(StageBlock(F, r, lo, hi))
        values = [zero] * space.n_atoms
        for blk in new_blocks:
            for i in blk.block:
                values[i] = blk.r
        stages.append(Stage(n, alpha, new_blocks, tuple(values)))
        blocks = [blk.block.mask for blk in new_blocks]
    if not stages:
        stages = [Stage(n, Fraction(1, 2**n), [], tuple([zero] * space.n_atoms)) for n in range(1, N + 1)]
    # Cauchy bounds between stages
    worst = zero
    for k in range(1, N + 1):
        for n in range(k, N + 1):
            gap = max((abs(x - y) for x, y in zip(stages[k - 1].values, stages[n - 1].values)), default=zero)
            bound = Fraction(4, 2**k)
            if gap > bound + _tol(float(bound) if not exact else bound):
                raise InternalCheckFailed(f"|f_{k} - f_{n}| = {gap} exceeds 2^(2-{k})")
            worst = max(worst, gap / bound)
    f = Integrand.from_atoms(space, stages[-1].values)
    diag = {"max_r": max_r, "r_bound": rmax, "cauchy_ratio": worst, "transfer": transfer_ok}
    if not transfer_ok:
        raise InternalCheckFailed("a stage value is not in the range taken with respect to M_0")
    if verify:
        rep = verify_rn(Gamma, M, f, tol)
        diag["residuals"] = rep.residuals
        diag["max_residual"] = rep.max_residual
        diag["verified"] = rep.ok
    return RnResult(f, stages, b, N, diag)


def _inside(r, bounds):
    lo, hi = bounds
    if r < lo - _tol(lo):
        return False
    return hi is None or r <= hi + _tol(hi)


@dataclass
class RnReport:
    ok: bool
    residuals: dict
    embedded_residuals: dict
    max_residual: object
    violations: list
    checks: list


def verify_rn(Gamma, M, f: Integrand, tol=Fraction(1, 10**6)) -> RnReport:
    """h(Gamma(E), integral over E of f dM) <= tol for every measurable E,
    together with the embedded identity against U_{M_0}."""
    space = M.space
    U0 = EmbeddedSetFn(integral_measure(M))
    tolf = tol if M.dim == 1 else float(tol)
    residuals, emb, violations, checks = {}, {}, [], []
    for e in range(space.full_mask + 1):
        E = MSet(space, e)
        key = set_key(e) or "empty"
        val = integrate(f, M, E).value
        d = hausdorff(Gamma(e), val)
        j = integrate(f, U0, E).value
        d2 = (convex.embed(Gamma(e)) - j).norm()
        residuals[key] = d
        emb[key] = d2
        if d > tolf or d2 > tolf:
            violations.append(key)
        checks.append(within(f"rn.residual.{key}", "rn.derivative-identity", d, tolf))
        checks.append(within(f"rn.embedded.{key}", "rn.embedded-derivative-identity", d2, tolf))
    mx = max(residuals.values())
    return RnReport(not violations, residuals, emb, mx, violations, checks)


def transfer_holds(Gamma, M, E, alpha) -> bool:
    """Every r in A_{Gamma,M}(E, alpha) lies in A_{Gamma,M_0}(E, alpha)
    (checked at the endpoints and the midpoint; both sets are intervals)."""
    e = E if isinstance(E, int) else E.mask
    vt = M.variation_table
    r1 = RangeEngine(Gamma, M, vt).bounds(e, alpha)
    if r1 is None:
        return True
    r0 = RangeEngine(Gamma, integral_measure(M), vt).bounds(e, alpha)
    if r0 is None:
        return False
    lo, hi = r1
    pts = [lo] if hi is None else [lo, hi, (lo + hi) / 2]
    return all(_inside(r, r0) for r in pts)

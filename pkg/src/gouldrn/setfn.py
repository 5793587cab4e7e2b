"""Tabulated set functions on a finite algebra.

:class:`ScalarSetFn` holds nonnegative reals, :class:`MultiSetFn` holds
convex bodies, and :class:`EmbeddedSetFn` is the image of a
:class:`MultiSetFn` under the support-function embedding.  All three share
``space``, ``kind``, ``__call__`` (on an :class:`~gouldrn.space.MSet` or a
mask) and ``norm`` (the magnitude used by variations).

Exhaustion clauses quantified over every epsilon reduce, on a finite
space, to "the uncovered residual has measure zero"; that is the form
implemented and tested here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from . import convex
from .convex import as_fraction, contains, minkowski_sum, norm_h
from .errors import (
    InternalCheckFailed,
    InvariantError,
    NoExhaustion,
    NotAdditive,
    NotExhaustion,
    NotStronglyAC,
    NoWitness,
    NoWitnessNeeded,
    TooLarge,
)
from .space import DEFAULT_MAX_ATOMS, FiniteSpace, MSet, bits, partition_masks, submasks

FLOAT_TOL = 1e-9


def _mask(E) -> int:
    return E if isinstance(E, int) else E.mask


def _exact(*xs) -> bool:
    return not any(isinstance(x, float) for x in xs)


def approx_eq(a, b, tol=FLOAT_TOL) -> bool:
    if _exact(a, b):
        return a == b
    return abs(a - b) <= tol * (1.0 + max(abs(a), abs(b)))


def approx_le(a, b, tol=FLOAT_TOL) -> bool:
    if _exact(a, b):
        return a <= b
    return a <= b + tol * (1.0 + max(abs(a), abs(b)))


def is_zero(x, tol=FLOAT_TOL) -> bool:
    return x == 0 if _exact(x) else abs(x) <= tol


def parse_set_key(key: str) -> int:
    """ "0,2" (or "[0, 2]", "{0,2}") -> bit mask; "" -> empty set."""
    key = key.strip().strip("[]{}() ")
    mask = 0
    if key:
        for part in key.split(","):
            mask |= 1 << int(part)
    return mask


def set_key(mask: int) -> str:
    return ",".join(str(i) for i in bits(mask))


@dataclass
class Flags:
    monotone: bool
    subadditive: bool
    additive: bool
    witnesses: dict = field(default_factory=dict)

    @property
    def submeasure(self) -> bool:
        return self.monotone and self.subadditive

    def as_dict(self) -> dict:
        return {"monotone": self.monotone, "subadditive": self.subadditive, "additive": self.additive}


class _Tabulated:
    kind = ""

    def __init__(self, space: FiniteSpace, table: dict):
        self.space = space
        n = 1 << space.n_atoms
        if len(table) != n or any(not 0 <= k < n for k in table):
            raise InvariantError(f"set function must be tabulated on all {n} measurable sets")
        self.table = table

    def __call__(self, E):
        return self.table[_mask(E)]

    def items(self):
        return sorted(self.table.items())

    @cached_property
    def flags(self) -> Flags:
        return classify(self)

    @property
    def norm_subadditive(self) -> bool:
        return self.flags.subadditive

    @cached_property
    def variation_table(self) -> dict:
        return _variation_table(self)

    @cached_property
    def variation_measure(self) -> ScalarSetFn:
        return ScalarSetFn(self.space, dict(self.variation_table))


class ScalarSetFn(_Tabulated):
    """mu: algebra -> [0, inf) with mu(empty) = 0."""

    kind = "scalar"

    def __init__(self, space: FiniteSpace, table: dict):
        super().__init__(space, table)
        if not is_zero(table[0]):
            raise InvariantError("μ(∅)≠0: a set function must vanish on the empty set")
        for k, v in table.items():
            if v < 0:
                raise InvariantError(f"negative value {v} on {set_key(k)}")

    @classmethod
    def from_function(cls, space: FiniteSpace, fn) -> ScalarSetFn:
        return cls(space, {m: fn(MSet(space, m)) for m in range(1 << space.n_atoms)})

    @classmethod
    def additive(cls, space: FiniteSpace, atom_values) -> ScalarSetFn:
        vals = [as_fraction(v) if not isinstance(v, float) else v for v in atom_values]
        if len(vals) != space.n_atoms:
            raise InvariantError("one value per atom required")
        table = {0: Fraction(0)}
        for m in range(1, 1 << space.n_atoms):
            low = m & -m
            table[m] = table[m ^ low] + vals[low.bit_length() - 1]
        return cls(space, table)

    @property
    def dim(self):
        return 0

    def norm(self, E):
        return self.table[_mask(E)]

    def to_json(self) -> dict:
        return {
            "kind": "scalar",
            "generator": "tabulated",
            "values": {set_key(k): _num_json(v) for k, v in self.items()},
        }


class MultiSetFn(_Tabulated):
    """M: algebra -> compact convex bodies with M(empty) = {0}."""

    kind = "multi"

    def __init__(self, space: FiniteSpace, table: dict):
        super().__init__(space, table)
        dims = {b.dim for b in table.values()}
        if len(dims) != 1:
            raise InvariantError("all values must share one dimension")
        self.dim = dims.pop()
        if not table[0].is_zero():
            raise InvariantError("M(∅)≠{0}: a multivalued set function must vanish on the empty set")

    @classmethod
    def from_function(cls, space: FiniteSpace, fn) -> MultiSetFn:
        return cls(space, {m: fn(MSet(space, m)) for m in range(1 << space.n_atoms)})

    @classmethod
    def additive(cls, space: FiniteSpace, atom_bodies) -> MultiSetFn:
        bodies = list(atom_bodies)
        if len(bodies) != space.n_atoms:
            raise InvariantError("one body per atom required")
        dim = bodies[0].dim if bodies else 1
        table = {0: convex.zero(dim)}
        for m in range(1, 1 << space.n_atoms):
            low = m & -m
            table[m] = minkowski_sum(table[m ^ low], bodies[low.bit_length() - 1])
        return cls(space, table)

    def norm(self, E):
        return norm_h(self.table[_mask(E)])

    def scaled(self, r) -> MultiSetFn:
        return MultiSetFn(self.space, {k: convex.scale(r, v) for k, v in self.table.items()})

    def embedded(self) -> EmbeddedSetFn:
        return EmbeddedSetFn(self)

    def to_json(self) -> dict:
        return {
            "kind": "multi",
            "generator": "tabulated",
            "values": {set_key(k): v.to_json() for k, v in self.items()},
        }


class EmbeddedSetFn:
    """U_M: E -> h_{M(E)}, a set function with values in continuous
    functions on the unit sphere."""

    kind = "embedded"

    def __init__(self, M: MultiSetFn):
        self.M = M
        self.space = M.space
        self.dim = M.dim
        self._cache = {}

    def __call__(self, E):
        m = _mask(E)
        if m not in self._cache:
            self._cache[m] = convex.embed(self.M(m))
        return self._cache[m]

    def norm(self, E):
        return self(E).norm()

    @property
    def norm_subadditive(self) -> bool:
        return self.M.flags.subadditive

    @cached_property
    def variation_table(self) -> dict:
        return _variation_table(self)


def _num_json(v):
    if isinstance(v, float):
        return float(f"{v:.12g}")
    return str(v)


# -- classification ------------------------------------------------------------


def _le_value(F, a, b, tol):
    if F.kind == "scalar":
        return approx_le(a, b, tol)
    return contains(b, a)


def _eq_value(F, a, b, tol):
    if F.kind == "scalar":
        return approx_eq(a, b, tol)
    return a == b


def _add_value(F, a, b):
    if F.kind == "scalar":
        return a + b
    return minkowski_sum(a, b)


def classify(F, tol: float = FLOAT_TOL) -> Flags:
    """Monotonicity, subadditivity and additivity, decided exhaustively.

    Monotonicity is checked on covering pairs (B minus one atom, B), which
    by transitivity covers every comparable pair; additivity is checked as
    F(U) = sum of F over the atoms of U, which is equivalent to additivity
    on all disjoint pairs.
    """
    n = F.space.n_atoms
    full = (1 << n) - 1
    wit = {}
    monotone = True
    for B in range(1, full + 1):
        for i in bits(B):
            A = B ^ (1 << i)
            if not _le_value(F, F(A), F(B), tol):
                monotone = False
                wit["monotone"] = (A, B)
                break
        if not monotone:
            break
    subadditive = True
    for U in range(1, full + 1):
        low = U & -U
        rest = U ^ low
        # each unordered split {A, U-A} once: A contains the lowest atom
        for s in submasks(rest):
            A = s | low
            B = U ^ A
            if B == 0:
                continue
            if not _le_value(F, F(U), _add_value(F, F(A), F(B)), tol):
                subadditive = False
                wit["subadditive"] = (A, B)
                break
        if not subadditive:
            break
    additive = True
    acc = {0: F(0)}
    for U in range(1, full + 1):
        low = U & -U
        acc[U] = _add_value(F, acc[U ^ low], F(low))
        if not _eq_value(F, F(U), acc[U], tol):
            additive = False
            wit["additive"] = (U,)
            break
    return Flags(monotone, subadditive, additive, wit)


# -- variations ----------------------------------------------------------------


def _sum(values):
    values = list(values)
    if _exact(*values):
        return sum(values, Fraction(0))
    return math.fsum(values)


def _variation_dp(F) -> dict:
    """Exact variation of every measurable set by dynamic programming over
    subsets: v(U) = max over blocks B containing the least atom of U of
    |F(B)| + v(U - B)."""
    n = F.space.n_atoms
    norms = {m: F.norm(m) for m in range(1 << n)}
    v = {0: norms[0] * 0}
    for U in range(1, 1 << n):
        low = U & -U
        rest = U ^ low
        best = None
        for s in submasks(rest):
            B = s | low
            val = norms[B] + v[U ^ B]
            if best is None or val > best:
                best = val
        v[U] = best
    return v


def _variation_table(F, max_atoms: int = DEFAULT_MAX_ATOMS) -> dict:
    n = F.space.n_atoms
    if F.norm_subadditive:
        atom_norms = [F.norm(1 << i) for i in range(n)]
        return {m: _sum(atom_norms[i] for i in bits(m)) for m in range(1 << n)}
    if n > max_atoms:
        raise TooLarge(f"{n} atoms exceed the variation guard {max_atoms}")
    return _variation_dp(F)


def variation(F, E) -> object:
    """sup over partitions of E of the summed magnitudes |F(E_i)|.

    Uses the atoms partition when the magnitudes are subadditive, exact
    search over partitions otherwise.
    """
    return F.variation_table[_mask(E)]


def variation_bruteforce(F, E, max_atoms: int = DEFAULT_MAX_ATOMS):
    """Variation by literal enumeration of every partition of E."""
    best = None
    for blocks in partition_masks(_mask(E), max_atoms):
        val = _sum(F.norm(b) for b in blocks) if blocks else F.norm(0) * 0
        if best is None or val > best:
            best = val
    return best


def _as_mask(space: FiniteSpace, pts):
    if isinstance(pts, MSet):
        return pts.mask, True
    return frozenset(pts), False


def semivariation(F, pts):
    """m*(E) = sup |F(A)| over measurable A inside the point set E.

    ``pts`` may be an :class:`MSet` or an iterable of point indices.
    """
    space = F.space
    inner = pts.mask if isinstance(pts, MSet) else space.inner(pts).mask
    best = F.norm(0) * 0
    for A in submasks(inner):
        val = F.norm(A)
        if val > best:
            best = val
    if not approx_le(best, variation(F, inner)):
        raise InternalCheckFailed("semivariation exceeds variation")
    return best


def mu_tilde(F, pts):
    """inf of the variation over measurable covers of the point set E,
    i.e. the variation of the union of atoms meeting E."""
    space = F.space
    if isinstance(pts, MSet):
        return variation(F, pts)
    return variation(F, space.cover(pts))


def inner_variation(F, pts):
    """Variation of an arbitrary point set (sup over measurable families inside it)."""
    if isinstance(pts, MSet):
        return variation(F, pts)
    return variation(F, F.space.inner(pts))


def small_variation_witness(M, E) -> MSet:
    """A measurable B inside E with 0 < v_M(B) < 2 |M(B)|_h.

    Atoms of E are tried first, then larger subsets by size.
    """
    space = M.space
    e = _mask(E)
    if is_zero(variation(M, e)):
        raise NoWitnessNeeded(f"v_M({set_key(e)}) = 0")
    for B in sorted(submasks(e), key=lambda m: (bin(m).count("1"), m)):
        if B == 0:
            continue
        v = variation(M, B)
        if not is_zero(v) and v < 2 * M.norm(B):
            return MSet(space, B)
    raise NoWitness(f"no set B inside {set_key(e)} with v_M(B) < 2|M(B)|_h")


# -- exhaustions ---------------------------------------------------------------


def _require_additive(mu):
    if mu.kind != "scalar" or not mu.flags.additive:
        raise NotAdditive("exhaustions are taken with respect to a finitely additive measure")


def build_exhaustion(mu: ScalarSetFn, E, has_P, prefer: str = "fine") -> list:
    """A mu-exhaustion of E by pairwise disjoint sets with property P.

    On a finite space the residual must have measure zero.  ``has_P`` is a
    predicate on :class:`MSet`.  ``prefer="fine"`` tries small blocks first
    (atoms), ``prefer="coarse"`` tries the largest blocks first.  Null atoms
    are left in the residual when possible.
    """
    _require_additive(mu)
    space = mu.space
    e = _mask(E)
    memo_p = {}
    failed = set()

    def P(m):
        if m not in memo_p:
            memo_p[m] = bool(has_P(MSet(space, m)))
        return memo_p[m]

    def solve(rem):
        if rem == 0:
            return []
        if rem in failed:
            return None
        low = rem & -rem
        if is_zero(mu(low)):
            sub = solve(rem ^ low)
            if sub is not None:
                return sub
        cands = [s | low for s in submasks(rem ^ low)]
        cands.sort(key=lambda m: (bin(m).count("1"), m), reverse=(prefer == "coarse"))
        for B in cands:
            if is_zero(mu(B)) or not P(B):
                continue
            sub = solve(rem ^ B)
            if sub is not None:
                return [B] + sub
        failed.add(rem)
        return None

    found = solve(e)
    if found is None:
        raise NoExhaustion(f"no exhaustion of {set_key(e)} by sets with the property", block=MSet(space, e))
    covered = 0
    for b in found:
        covered |= b
    if not is_zero(mu(e & ~covered)):
        raise InternalCheckFailed("exhaustion residual is not null")
    return [MSet(space, b) for b in found]


def is_exhaustion(mu, family, E) -> bool:
    e = _mask(E)
    covered = 0
    for B in family:
        b = _mask(B)
        if b & ~e or b & covered or is_zero(mu(b)):
            return False
        covered |= b
    return is_zero(mu(e & ~covered))


def complete_exhaustion(exh, E, mu: ScalarSetFn) -> list:
    """Fold the null residual of an exhaustion into its first set, so the
    family covers E exactly."""
    _require_additive(mu)
    space = mu.space
    e = _mask(E)
    if not is_exhaustion(mu, exh, e):
        raise NotExhaustion(f"family is not a mu-exhaustion of {set_key(e)}")
    masks = [_mask(B) for B in exh]
    if not masks:
        return []
    covered = 0
    for b in masks:
        covered |= b
    residual = e & ~covered
    first = masks[0] | residual
    if not approx_eq(mu(first), mu(masks[0])):
        raise InternalCheckFailed("folding a null residual changed the measure")
    out = [first] + masks[1:]
    if not is_exhaustion(mu, out, e):
        raise InternalCheckFailed("completed family is not an exhaustion")
    return [MSet(space, b) for b in out]


def check_null_difference(mu, has_P):
    """Is P constant on pairs A, B with mu(A), mu(B) > 0 and mu(A Δ B) = 0?

    Returns ``(True, None)`` or ``(False, (A, B))`` for the first violation.
    """
    space = mu.space
    full = space.full_mask
    nulls = [N for N in range(1, full + 1) if is_zero(mu(N))]
    memo = {}

    def P(m):
        if m not in memo:
            memo[m] = bool(has_P(MSet(space, m)))
        return memo[m]

    for A in range(1, full + 1):
        if is_zero(mu(A)):
            continue
        for N in nulls:
            B = A ^ N
            if B <= A or is_zero(mu(B)):
                continue
            if P(A) != P(B):
                return False, (MSet(space, A), MSet(space, B))
    return True, None


def strong_ac_constant(Gamma, M):
    """Least b with |Gamma(E)|_h <= b v_M(E) for every measurable E."""
    best = Fraction(0)
    for m in range(1 << M.space.n_atoms):
        g = Gamma.norm(m)
        v = variation(M, m)
        if is_zero(v):
            if not is_zero(g):
                raise NotStronglyAC(
                    f"|Γ({set_key(m)})|_h = {g} > 0 but v_M = 0", witness=MSet(M.space, m)
                )
            continue
        ratio = g / v
        if ratio > best:
            best = ratio
    return best

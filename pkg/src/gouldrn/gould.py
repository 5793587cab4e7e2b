"""Gould integration of real functions on finite measurable spaces.

On a finite algebra the net of partitions has a maximum, the partition
into atoms, so the net converges iff every choice of tags at the atoms
partition gives the same Riemann sum.  That is the decision procedure
used by :func:`integrate`; the other functions in this module build on it.

The set function ``m`` may be a :class:`ScalarSetFn`, a
:class:`MultiSetFn` (then the integrand must be nonnegative) or an
:class:`EmbeddedSetFn` (signed integrands allowed, values are
:class:`SupportFn`).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from . import convex
from .checks import holds, within
from .convex import ConvexBody, SupportFn, as_fraction, contains, hausdorff, minkowski_sum, support_sup
from .errors import (
    InternalCheckFailed,
    NegativeScale,
    NotAChain,
    NotAdditive,
    NotDisjoint,
    NotMultisubmeasure,
    NotTotallyMeasurable,
    TooLarge,
)
from .setfn import (
    FLOAT_TOL,
    EmbeddedSetFn,
    MultiSetFn,
    ScalarSetFn,
    _variation_dp,
    approx_eq,
    is_zero,
    mu_tilde,
    set_key,
    variation,
)
from .space import (
    DEFAULT_MAX_ATOMS,
    FiniteSpace,
    MSet,
    Partition,
    TaggedPartition,
    bits,
    enumerate_partitions,
    enumerate_tag_choices,
    is_refinement,
)


@dataclass(frozen=True)
class Integrand:
    """A real function on the points of ``space`` (exact rationals)."""

    space: FiniteSpace
    values: tuple

    def __post_init__(self):
        vals = tuple(as_fraction(v) for v in self.values)
        if len(vals) != self.space.n_points:
            raise ValueError(f"{len(vals)} values for {self.space.n_points} points")
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, space: FiniteSpace, c=1) -> Integrand:
        return cls(space, (c,) * space.n_points)

    @classmethod
    def from_atoms(cls, space: FiniteSpace, atom_values) -> Integrand:
        """Simple function, constant on each atom."""
        atom_values = list(atom_values)
        return cls(space, tuple(atom_values[space.atom_of[p]] for p in range(space.n_points)))

    @classmethod
    def from_function(cls, space: FiniteSpace, fn) -> Integrand:
        return cls(space, tuple(fn(p) for p in range(space.n_points)))

    @classmethod
    def indicator(cls, E: MSet, c=1) -> Integrand:
        space = E.space
        return cls.from_atoms(space, [c if (E.mask >> i) & 1 else 0 for i in range(space.n_atoms)])

    def __call__(self, t):
        return self.values[t]

    def on_atom(self, i: int) -> list:
        return [self.values[p] for p in self.space.atoms[i]]

    def osc(self, i: int):
        vals = self.on_atom(i)
        return max(vals) - min(vals)

    def bound(self):
        return max((abs(v) for v in self.values), default=Fraction(0))

    def abs(self) -> Integrand:
        return Integrand(self.space, tuple(abs(v) for v in self.values))

    def is_simple(self) -> bool:
        return all(self.osc(i) == 0 for i in range(self.space.n_atoms))

    def is_nonneg(self, E: MSet | None = None) -> bool:
        pts = range(self.space.n_points) if E is None else E.points()
        return all(self.values[p] >= 0 for p in pts)

    def atom_values(self) -> list:
        """Value at the first point of every atom (meaningful for simple functions)."""
        return [self.values[a[0]] for a in self.space.atoms]

    def to_json(self) -> dict:
        return {"values": [str(v) for v in self.values]}


# -- arithmetic on the three kinds of set-function values ----------------------


def _zero(m):
    if m.kind == "scalar":
        return Fraction(0)
    if m.kind == "multi":
        return convex.zero(m.dim)
    return SupportFn.zero(m.dim)


def _term(c, val, m):
    if m.kind == "multi":
        if c < 0:
            raise NegativeScale(f"negative integrand value {c} with a multivalued set function")
        return convex.scale(c, val)
    return val * c


def _add(a, b, m):
    if m.kind == "multi":
        return minkowski_sum(a, b)
    return a + b


def value_distance(a, b, kind, tol=convex.DEFAULT_TOL):
    """|a-b|, h(a,b) or ||a-b||_inf depending on the kind of value."""
    if kind == "scalar":
        return abs(a - b)
    if kind == "multi":
        return hausdorff(a, b, tol)
    return (a - b).norm()


def _body(m, B):
    if m.kind == "multi":
        return m(B)
    return m.M(B)


def _check_space(f: Integrand, m):
    if f.space != m.space:
        raise ValueError("integrand and set function live on different spaces")


# -- Riemann sums and the integral ---------------------------------------------


def riemann_sum(f: Integrand, TP: TaggedPartition, m):
    """sum_i f(t_i) m(A_i), Minkowski-summed for multivalued m."""
    _check_space(f, m)
    total = _zero(m)
    for B, t in zip(TP.partition.blocks, TP.tags):
        total = _add(total, _term(f(t), m(B), m), m)
    return total


def _fbounds(f: Integrand, mask: int):
    pts = MSet(f.space, mask).points()
    vals = [f(p) for p in pts]
    return min(vals), max(vals)


def _envelope_pieces(f, m, masks, mode):
    """Pieces (p, q, body) for support_sup.  ``mode`` is "upper", "lower"
    (pointwise extreme over tags) or "width" (upper minus lower)."""
    out = []
    for b in masks:
        lo, hi = _fbounds(f, b)
        body = _body(m, b)
        if mode == "upper":
            out.append((hi, lo, body))
        elif mode == "lower":
            out.append((lo, hi, body))
        elif mode == "neg_upper":
            out.append((-hi, -lo, body))
        elif mode == "neg_lower":
            out.append((-lo, -hi, body))
        else:
            w = hi - lo
            if w:
                out.append((w, -w, body))
    return out


def tag_spread(f: Integrand, m, P: Partition):
    """Largest distance between two Riemann sums at P (over all tag choices)."""
    _check_space(f, m)
    masks = P.masks
    if m.kind == "scalar":
        total = Fraction(0)
        for b in masks:
            lo, hi = _fbounds(f, b)
            total += (hi - lo) * m(b)
        return total
    pieces = _envelope_pieces(f, m, masks, "width")
    if not pieces:
        return Fraction(0) if m.dim == 1 else 0.0
    return support_sup(pieces, 0, m.dim)


def tag_spread_bruteforce(f: Integrand, m, P: Partition, max_choices: int = 5000):
    """Same as :func:`tag_spread`, by enumerating every tag choice."""
    sums = [riemann_sum(f, TP, m) for TP in enumerate_tag_choices(P, max_choices)]
    best = Fraction(0)
    for a, b in itertools.combinations(sums, 2):
        d = value_distance(a, b, m.kind)
        if d > best:
            best = d
    return best


@dataclass
class IntegrationReport:
    value: object
    integrable: bool
    partition: Partition
    tag_spread: object
    diagnostics: dict = field(default_factory=dict)


def integrate(f: Integrand, m, E: MSet | None = None, tol: float = FLOAT_TOL) -> IntegrationReport:
    """Gould integral of f over E.

    f is integrable on E iff (f(t) - f(s)) m(A) = 0 for every atom A of E
    and all t, s in A; then the integral is the common value of the
    Riemann sums at the atoms partition.
    """
    _check_space(f, m)
    space = m.space
    E = space.full if E is None else E
    if m.kind == "multi" and not f.is_nonneg(E):
        raise NegativeScale("multivalued integrals need a nonnegative integrand")
    P = space.atoms_partition(E)
    bad = []
    for i in bits(E.mask):
        if f.osc(i) != 0 and not is_zero(m.norm(1 << i)):
            bad.append(i)
    spread = tag_spread(f, m, P)
    integrable = not bad
    if integrable != is_zero(spread, tol):
        raise InternalCheckFailed("integrability criterion disagrees with the tag spread")
    value = None
    if integrable:
        tags = tuple(space.atoms[i][0] for i in bits(E.mask))
        value = riemann_sum(f, TaggedPartition(P, tags), m)
    diag = {"oscillating_atoms": bad}
    if m.kind == "scalar":
        lo = sum((_fbounds(f, b)[0] * m(b) for b in P.masks), Fraction(0))
        hi = sum((_fbounds(f, b)[1] * m(b) for b in P.masks), Fraction(0))
        diag["envelope"] = (lo, hi)
    return IntegrationReport(value, integrable, P, spread, diag)


# -- integral functions --------------------------------------------------------


def integral_measure(m):
    """lambda_m (scalar), M_0 (multivalued) or U_{M_0} (embedded): the
    set function E -> integral of 1_E, i.e. the sum of m over the atoms of E."""
    cached = getattr(m, "_integral_measure", None)
    if cached is not None:
        return cached
    n = m.space.n_atoms
    if m.kind == "scalar":
        out = ScalarSetFn.additive(m.space, [m(1 << i) for i in range(n)])
    elif m.kind == "multi":
        out = MultiSetFn.additive(m.space, [m(1 << i) for i in range(n)])
    else:
        out = EmbeddedSetFn(integral_measure(m.M))
    if out.kind != "embedded" and not out.flags.additive:
        raise InternalCheckFailed("integral function is not additive")
    m._integral_measure = out
    return out


def integral_function(m, E: MSet):
    """lambda_m(E) = integral over T of 1_E dm (and M_0(E) for multivalued m)."""
    total = _zero(m)
    for i in bits(E.mask if isinstance(E, MSet) else E):
        total = _add(total, m(1 << i), m)
    return total


def additivity_defect(F, tol: float = FLOAT_TOL):
    """First disjoint pair (A, B) with F(A u B) != F(A) + F(B), or None.

    Every unordered pair of disjoint nonempty sets is checked.
    """
    full = F.space.full_mask
    for U in range(1, full + 1):
        low = U & -U
        rest = U ^ low
        sub = rest
        while True:
            A = sub | low
            B = U ^ A
            if B:
                lhs = F(U)
                rhs = _add(F(A), F(B), F)
                if F.kind == "scalar":
                    same = approx_eq(lhs, rhs, tol)
                elif F.kind == "multi":
                    same = lhs == rhs
                else:
                    same = (lhs - rhs).norm() <= tol
                if not same:
                    return A, B
            if sub == 0:
                break
            sub = (sub - 1) & rest
    return None


@dataclass
class MultimeasureIntegral:
    value: ConvexBody
    bound: ConvexBody
    hull: ConvexBody
    distance: float
    n_partitions: int


def _sigma_one(M, masks):
    total = convex.zero(M.dim)
    for b in masks:
        total = minkowski_sum(total, M(b))
    return total


def integrate_multimeasure(M: MultiSetFn, max_atoms: int = DEFAULT_MAX_ATOMS, tol: float = FLOAT_TOL):
    """Integral over T of the constant 1 against a multisubmeasure.

    The value is M_0(T).  Every sigma(1, P) is checked to lie in the bound
    K = sigma(1, atoms partition), and the hull of their union is checked
    to coincide with M_0(T).
    """
    if not M.flags.submeasure:
        raise NotMultisubmeasure("M must be monotone and subadditive")
    space = M.space
    value = integral_function(M, space.full)
    K = _sigma_one(M, [1 << i for i in range(space.n_atoms)])
    hull = None
    count = 0
    for P in enumerate_partitions(space.full, max_atoms):
        s = _sigma_one(M, P.masks)
        if not contains(K, s):
            raise InternalCheckFailed(f"sigma(1, P) escapes the bound at P={P.blocks}")
        hull = s if hull is None else convex.hull_union(hull, s)
        count += 1
    dist = hausdorff(hull, value)
    if dist > tol:
        raise InternalCheckFailed(f"hull of partition sums differs from M_0(T) by {dist}")
    return MultimeasureIntegral(value, K, hull, dist, count)


# -- total measurability -------------------------------------------------------


@dataclass
class TotalMeasurability:
    ok: bool
    partition: Partition
    bad: MSet
    bad_variation: object


def totally_measurable(f: Integrand, mu, eps) -> TotalMeasurability:
    """Is there a partition {A_0, ..., A_n} with variation(A_0) < eps and
    oscillation of f below eps on every other block?

    On atoms the best choice is forced: A_0 collects the atoms where f
    oscillates by at least eps.
    """
    eps = as_fraction(eps) if not isinstance(eps, float) else eps
    if eps <= 0:
        raise ValueError("eps must be positive")
    _check_space(f, mu)
    space = mu.space
    bad = 0
    good = []
    for i in range(space.n_atoms):
        if f.osc(i) >= eps:
            bad |= 1 << i
        else:
            good.append(1 << i)
    vb = variation(mu, bad)
    blocks = ([bad] if bad else []) + good
    return TotalMeasurability(vb < eps, Partition.from_masks(space, blocks), MSet(space, bad), vb)


@dataclass
class SimpleStep:
    eps: object
    approx: Integrand
    exceptional: tuple
    mu_tilde: object


def default_schedule(n: int = 20):
    return [Fraction(1, 2**k) for k in range(1, n + 1)]


def simple_approx(f: Integrand, mu, schedule=None) -> list:
    """Simple functions f_n with mu~({|f_n - f| > eps_n}) -> 0.

    f_n is constant on each block of the witness partition for eps_n, with
    the value of f at the block's first point.
    """
    schedule = default_schedule() if schedule is None else list(schedule)
    space = mu.space
    steps = []
    for eps in schedule:
        tm = totally_measurable(f, mu, eps)
        if not tm.ok:
            raise NotTotallyMeasurable(f"f is not totally measurable at eps={eps}", eps=eps)
        vals = list(f.values)
        for B in tm.partition.blocks:
            pts = B.points()
            rep = f(pts[0])
            for p in pts:
                vals[p] = rep
        fn = Integrand(space, tuple(vals))
        exc = tuple(p for p in range(space.n_points) if abs(fn(p) - f(p)) > eps)
        mt = mu_tilde(mu, exc)
        if mt > tm.bad_variation:
            raise InternalCheckFailed("exceptional set is not covered by the small block")
        steps.append(SimpleStep(eps, fn, exc, mt))
    return steps


# -- oscillation bounds and chains ---------------------------------------------


def _partition_extremes(f, m, masks):
    """(min, max) of sigma(f, P) over tags, for scalar m >= 0."""
    lo = hi = Fraction(0)
    for b in masks:
        a, c = _fbounds(f, b)
        lo += a * m(b)
        hi += c * m(b)
    return lo, hi


def ob(f: Integrand, m, E: MSet, max_atoms: int = 6):
    """Ob(f, E): largest distance between two tagged Riemann sums over
    partitions of E, by exhaustive enumeration of pairs of partitions."""
    _check_space(f, m)
    parts = [P.masks for P in enumerate_partitions(E, max_atoms)]
    if m.kind == "scalar":
        ext = [_partition_extremes(f, m, P) for P in parts]
        return max(e[1] for e in ext) - min(e[0] for e in ext)
    if len(parts) ** 2 > 10**5:
        raise TooLarge("too many partition pairs")
    best = None
    for P1 in parts:
        up = _envelope_pieces(f, m, P1, "upper")
        for P2 in parts:
            pieces = up + _envelope_pieces(f, m, P2, "neg_lower")
            v = support_sup(pieces, 0, m.dim)
            if best is None or v > best:
                best = v
    return best


def ob_bound(f: Integrand, m, P: Partition | None = None, tol: float = FLOAT_TOL):
    """Sum of Ob(f, E) over the blocks E of P (default: the atoms partition).

    For an integrable f this is 0 at the atoms partition, which is asserted.
    """
    space = m.space
    P = space.atoms_partition() if P is None else P
    total = sum((ob(f, m, B) for B in P.blocks), Fraction(0))
    if P.masks == space.atoms_partition(P.of).masks and integrate(f, m, P.of).integrable:
        if not is_zero(total, tol):
            raise InternalCheckFailed("integrable f with nonzero oscillation at the atoms partition")
    return total


def oscillation_defect(g: Integrand, m, P: Partition | None = None):
    """sum over E in P of |g(tau_E) m(E) - integral over E of g dm|, maximized
    over tags tau_E (embedded norm for multivalued m)."""
    space = m.space
    P = space.atoms_partition() if P is None else P
    total = Fraction(0)
    for B in P.blocks:
        rep = integrate(g, m, B)
        if not rep.integrable:
            raise ValueError(f"g is not integrable on {B}")
        best = Fraction(0)
        for t in B.points():
            d = value_distance(_term(g(t), m(B), m), rep.value, m.kind)
            best = max(best, d)
        total += best
    return total


@dataclass
class Envelope:
    partition: Partition
    lower: object
    upper: object
    width: object
    nested: bool

    def at(self, u):
        """(lower, upper) at a direction (scalar envelopes ignore u)."""
        if not isinstance(self.lower, list):
            return self.lower, self.upper
        return _eval_pieces(self.lower, u), _eval_pieces(self.upper, u)


def _eval_pieces(pieces, u):
    total = 0
    for p, q, A in pieces:
        h = convex.support(A, u)
        total += (p if h >= 0 else q) * h
    return total


def chain_estimator(f: Integrand, m, chain, tol: float = FLOAT_TOL) -> list:
    """Lower and upper Riemann-sum envelopes along a refinement chain.

    For scalar m the envelopes are numbers; otherwise they are kept as
    functions of the direction.  ``nested`` records whether the envelope at
    a partition lies inside the previous one (guaranteed when m is additive).
    """
    chain = list(chain)
    for P, Q in zip(chain, chain[1:]):
        if not is_refinement(P, Q):
            raise NotAChain("each partition must refine the previous one")
    out = []
    prev = None
    for P in chain:
        masks = P.masks
        if m.kind == "scalar":
            lo, hi = _partition_extremes(f, m, masks)
            nested = prev is None or (prev[0] <= lo and hi <= prev[1])
            out.append(Envelope(P, lo, hi, hi - lo, nested))
            prev = (lo, hi)
            continue
        lower = _envelope_pieces(f, m, masks, "lower")
        upper = _envelope_pieces(f, m, masks, "upper")
        width = tag_spread(f, m, P)
        nested = True
        if prev is not None:
            # upper_Q <= upper_P and lower_P <= lower_Q in every direction
            grow_up = support_sup(upper + prev[2], 0, m.dim)
            grow_lo = support_sup(prev[3] + _envelope_pieces(f, m, masks, "neg_lower"), 0, m.dim)
            nested = grow_up <= tol and grow_lo <= tol
        out.append(Envelope(P, lower, upper, width, nested))
        prev = (lower, upper, _envelope_pieces(f, m, masks, "neg_upper"), lower)
    return out


# -- discrete series -----------------------------------------------------------


def series_integral(coeffs, sets, m, tol: float = FLOAT_TOL):
    """sum_n c_n m(A_n) for pairwise disjoint A_n and additive m, checked
    against the integral of f = sum_n c_n 1_{A_n}."""
    coeffs = [as_fraction(c) for c in coeffs]
    sets = list(sets)
    if len(coeffs) != len(sets):
        raise ValueError("one coefficient per set required")
    acc = 0
    for A in sets:
        if acc & A.mask:
            raise NotDisjoint("sets must be pairwise disjoint")
        acc |= A.mask
    base = m.M if m.kind == "embedded" else m
    if not base.flags.additive:
        raise NotAdditive("the series formula needs a finitely additive set function")
    space = m.space
    total = _zero(m)
    atom_vals = [Fraction(0)] * space.n_atoms
    for c, A in zip(coeffs, sets):
        total = _add(total, _term(c, m(A), m), m)
        for i in A:
            atom_vals[i] = c
    f = Integrand.from_atoms(space, atom_vals)
    rep = integrate(f, m)
    if value_distance(rep.value, total, m.kind) > (0 if _exact_kind(m) else tol):
        raise InternalCheckFailed("series sum differs from the integral")
    return total


def _exact_kind(m):
    return m.kind == "scalar" or (m.kind == "multi" and m.dim == 1)


# -- equivalences --------------------------------------------------------------


def equivalence_suite(f: Integrand, m, tol: float = FLOAT_TOL) -> list:
    """Integrability and values against m versus its integral function, and
    (multivalued m) the integral of f against the embedded set function.

    Returns a list of :class:`Check` records.
    """
    checks = []
    lam = integral_measure(m)
    r1, r2 = integrate(f, m), integrate(f, lam)
    name = "lambda" if m.kind == "scalar" else "M0"
    checks.append(holds(f"equiv.{name}.integrable", "gould.integral-function-equivalence",
                        r1.integrable == r2.integrable, value=r1.integrable))
    if r1.integrable and r2.integrable:
        d = value_distance(r1.value, r2.value, m.kind)
        t = 0 if _exact_kind(m) else tol
        checks.append(within(f"equiv.{name}.value", "gould.integral-function-equivalence", d, t, value=r1.value))
    if m.kind == "multi":
        U = EmbeddedSetFn(m)
        r3 = integrate(f, U)
        checks.append(holds("equiv.embedded.integrable", "gould.embedded-integral",
                            r1.integrable == r3.integrable, value=r3.integrable))
        if r1.integrable and r3.integrable:
            d = (convex.embed(r1.value) - r3.value).norm()
            checks.append(within("equiv.embedded.value", "gould.embedded-integral", d, tol))
    return checks


def variation_of_integral(M: MultiSetFn, tol: float = FLOAT_TOL) -> list:
    """v_{M_0} = v_M and M(E) inside M_0(E) on every measurable set.

    v_M is computed by exact search over partitions, v_{M_0} through the
    additive fast path, so the two sides are independent computations.
    """
    if not M.flags.submeasure:
        raise NotMultisubmeasure("M must be monotone and subadditive")
    M0 = integral_measure(M)
    vM = _variation_dp(M)
    t = 0 if M.dim == 1 else tol
    checks = []
    for e in range(M.space.full_mask + 1):
        d = abs(vM[e] - variation(M0, e))
        checks.append(within(f"vM0.{set_key(e) or 'empty'}", "multi.variation-of-integral", d, t, value=vM[e]))
        checks.append(holds(f"M_in_M0.{set_key(e) or 'empty'}", "multi.inclusion-in-integral", contains(M0(e), M(e))))
    return checks

"""Scenario files: loading, validation and task execution.

A scenario is a JSON document::

    {
      "name": "...",
      "space": {"points": [...], "atoms": [[0, 1], [2]]},
      "measures": {"M": {"kind": "multi", "generator": "tabulated",
                         "values": {"": {"dim": 1, "lo": "0", "hi": "0"}, "0": ..., "0,1": ...}}},
      "integrands": {"f": {"values": ["1", "1/2", "3"]}},
      "tasks": [{"op": "integrate", "integrand": "f", "measure": "M", "set": [0, 1]}],
      "config": {"tol": "1e-9", "max_atoms": 10, "max_tag_choices": 1000000, "seed": 0}
    }

Every task produces :class:`~gouldrn.checks.Check` rows; :func:`run`
writes them to ``report.json`` and ``report.csv``.
"""
from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from fractions import Fraction

from . import convex, gould, rn, setfn
from .checks import Check, holds, jsonable, within
from .convex import ConvexBody
from .errors import GouldError, HypothesisFailed, InvariantError, NoExhaustion, ParseError
from .gould import Integrand
from .setfn import MultiSetFn, ScalarSetFn, parse_set_key, set_key
from .space import FiniteSpace, MSet, Partition, enumerate_partitions, is_refinement, common_refinement

EXIT_PASS, EXIT_FAIL, EXIT_INFRA = 0, 1, 2


@dataclass
class Scenario:
    space: FiniteSpace
    measures: dict
    integrands: dict
    tasks: list
    config: dict
    name: str = ""
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def tol(self) -> Fraction:
        return self.config["tol"]


# -- parsing -------------------------------------------------------------------


def _frac(x, where):
    try:
        return convex.as_fraction(x)
    except (ValueError, TypeError, ZeroDivisionError):
        raise ParseError(f"{where}: not a rational number: {x!r}") from None


def _need(d, key, where):
    if not isinstance(d, dict) or key not in d:
        raise ParseError(f"{where}: missing field '{key}'")
    return d[key]


def _parse_body(x, where) -> ConvexBody:
    try:
        return ConvexBody.from_json(x)
    except GouldError as exc:
        raise InvariantError(f"{where}: {exc}") from None
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{where}: bad body {x!r} ({exc})") from None


def parse_measure(sp: FiniteSpace, name: str, d: dict):
    where = f"measures.{name}"
    kind = _need(d, "kind", where)
    gen = d.get("generator", "tabulated")
    values = _need(d, "values", where)
    if kind not in ("scalar", "multi"):
        raise ParseError(f"{where}.kind: expected 'scalar' or 'multi', got {kind!r}")
    conv = (lambda v, w: _frac(v, w)) if kind == "scalar" else _parse_body
    try:
        if gen == "additive-from-atoms":
            if isinstance(values, list):
                atom_vals = [conv(v, f"{where}.values[{i}]") for i, v in enumerate(values)]
            else:
                atom_vals = [None] * sp.n_atoms
                for k, v in values.items():
                    m = parse_set_key(k)
                    if bin(m).count("1") != 1 or m > sp.full_mask:
                        raise ParseError(f"{where}.values['{k}']: expected a single atom index")
                    atom_vals[m.bit_length() - 1] = conv(v, f"{where}.values['{k}']")
            if len(atom_vals) != sp.n_atoms or any(v is None for v in atom_vals):
                raise ParseError(f"{where}.values: one value per atom required")
            cls = ScalarSetFn if kind == "scalar" else MultiSetFn
            F = cls.additive(sp, atom_vals)
        elif gen == "tabulated":
            if not isinstance(values, dict):
                raise ParseError(f"{where}.values: expected an object keyed by atom sets")
            table = {}
            for k, v in values.items():
                try:
                    m = parse_set_key(k)
                except ValueError:
                    raise ParseError(f"{where}.values: bad set key {k!r}") from None
                if m > sp.full_mask:
                    raise ParseError(f"{where}.values['{k}']: atom index out of range")
                table[m] = conv(v, f"{where}.values['{k}']")
            F = ScalarSetFn(sp, table) if kind == "scalar" else MultiSetFn(sp, table)
        else:
            raise ParseError(f"{where}.generator: unknown generator {gen!r}")
    except InvariantError as exc:
        raise InvariantError(f"{where}: {exc}") from None
    F.flags  # classification is computed at load time
    return F


def parse_integrand(sp: FiniteSpace, name: str, d: dict) -> Integrand:
    where = f"integrands.{name}"
    if isinstance(d, dict) and "values" in d:
        vals = [_frac(v, f"{where}.values[{i}]") for i, v in enumerate(d["values"])]
        if len(vals) != sp.n_points:
            raise InvariantError(f"{where}: {len(vals)} values for {sp.n_points} points")
        return Integrand(sp, tuple(vals))
    if isinstance(d, dict) and "atoms" in d:
        vals = [_frac(v, f"{where}.atoms[{i}]") for i, v in enumerate(d["atoms"])]
        if len(vals) != sp.n_atoms:
            raise InvariantError(f"{where}: {len(vals)} values for {sp.n_atoms} atoms")
        return Integrand.from_atoms(sp, vals)
    raise ParseError(f"{where}: expected 'values' (per point) or 'atoms' (per atom)")


DEFAULT_CONFIG = {"tol": "1e-9", "max_atoms": 10, "max_tag_choices": 10**6, "seed": 0}

_MEASURE_KEYS = ("measure", "gamma", "M")


def scenario_from_dict(data: dict, source: str = "<scenario>") -> Scenario:
    if not isinstance(data, dict):
        raise ParseError(f"{source}: top level must be an object")
    sd = _need(data, "space", source)
    try:
        sp = FiniteSpace.from_json(sd)
    except KeyError as exc:
        raise ParseError(f"space: missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        raise InvariantError(f"space: {exc}") from None
    measures = {n: parse_measure(sp, n, d) for n, d in data.get("measures", {}).items()}
    integrands = {n: parse_integrand(sp, n, d) for n, d in data.get("integrands", {}).items()}
    config = dict(DEFAULT_CONFIG)
    config.update(data.get("config", {}))
    config["tol"] = _frac(config["tol"], "config.tol")
    for key in ("tol", "max_atoms", "max_tag_choices"):
        if not config[key] > 0:
            raise InvariantError(f"config.{key} must be positive")
    tasks = data.get("tasks", [])
    if not isinstance(tasks, list):
        raise ParseError("tasks: expected a list")
    for i, t in enumerate(tasks):
        op = _need(t, "op", f"tasks[{i}]")
        if op not in OPS:
            raise ParseError(f"tasks[{i}].op: unknown operation {op!r}")
        for key in _MEASURE_KEYS:
            if key in t and t[key] not in measures:
                raise InvariantError(f"tasks[{i}].{key}: undeclared measure {t[key]!r}")
        if "integrand" in t and isinstance(t["integrand"], str) and t["integrand"] not in integrands:
            raise InvariantError(f"tasks[{i}].integrand: undeclared integrand {t['integrand']!r}")
        for key in ("set",):
            if key in t and any(not 0 <= a < sp.n_atoms for a in t[key]):
                raise InvariantError(f"tasks[{i}].set: atom index out of range")
    return Scenario(sp, measures, integrands, tasks, config, data.get("name", ""), data)


def load_scenario(path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(data, str(path))


def scenario_to_dict(sp: FiniteSpace, measures: dict, integrands: dict, tasks: list, config=None, name="") -> dict:
    """Serialize objects back to the scenario schema (used for counterexamples)."""
    out = {
        "name": name,
        "space": sp.to_json(),
        "measures": {n: m.to_json() for n, m in measures.items()},
        "integrands": {n: f.to_json() for n, f in integrands.items()},
        "tasks": tasks,
    }
    if config:
        out["config"] = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in config.items()}
    return out


# -- task helpers ----------------------------------------------------------------


def _set(sc: Scenario, t: dict) -> MSet:
    return sc.space.mset(t["set"]) if "set" in t else sc.space.full


def _measure(sc, t, key="measure"):
    return sc.measures[_need(t, key, f"task {t.get('op')}")]


def _integrand(sc, t):
    f = _need(t, "integrand", f"task {t.get('op')}")
    if isinstance(f, str):
        return sc.integrands[f]
    return parse_integrand(sc.space, "<inline>", f)


def _tol(sc, t, m=None):
    """Exact comparisons (0) where everything is rational, else the tolerance."""
    tol = convex.as_fraction(t["tolerance"]) if "tolerance" in t else sc.tol
    if m is not None and (m.kind == "scalar" or m.dim == 1):
        return Fraction(0)
    return float(tol)


def _expect(checks, t, prefix, ref, actual: dict):
    for k, v in t.get("expect", {}).items():
        if k not in actual:
            continue
        want = v
        got = actual[k]
        if isinstance(got, (Fraction, int)) and not isinstance(got, bool):
            want = convex.as_fraction(v)
        elif isinstance(got, float):
            checks.append(within(f"{prefix}.expect.{k}", ref, abs(got - float(convex.as_fraction(v))), 1e-9, value=got))
            continue
        checks.append(holds(f"{prefix}.expect.{k}", ref, got == want, value=got))


# -- operations --------------------------------------------------------------------


def op_classify(sc, t):
    F = _measure(sc, t)
    flags = setfn.classify(F)
    checks = [holds(f"classify.{k}", "setfn.classification", True, value=v) for k, v in flags.as_dict().items()]
    declared = t.get("expect", {})
    for k, v in declared.items():
        checks.append(holds(f"classify.expect.{k}", "setfn.classification", getattr(flags, k) == v, value=getattr(flags, k)))
    return checks


def op_variation(sc, t):
    F = _measure(sc, t)
    E = _set(sc, t)
    v = setfn.variation(F, E)
    checks = [holds("variation.value", "setfn.variation", True, value=v)]
    if len(E) <= sc.config["max_atoms"]:
        vb = setfn.variation_bruteforce(F, E, sc.config["max_atoms"])
        checks.append(within("variation.bruteforce", "setfn.variation", abs(v - vb), _tol(sc, t, F), value=vb))
    _expect(checks, t, "variation", "setfn.variation", {"value": v})
    return checks


def variation_suite(F, max_atoms=8) -> list:
    """Properties of the variation: fast path against enumeration and the
    standard facts relating F and its variation."""
    sp = F.space
    checks = []
    exact = F.kind == "scalar" or F.dim == 1
    tol = 0 if exact else 1e-9
    full = sp.full_mask
    worst = 0
    if sp.n_atoms <= max_atoms:
        for e in range(full + 1):
            worst = max(worst, abs(setfn.variation(F, e) - setfn.variation_bruteforce(F, e, max_atoms)))
        checks.append(within("variation.fast-vs-enumeration", "setfn.variation", worst, tol))
    v = F.variation_table
    checks.append(holds("variation.dominates", "setfn.variation-dominates",
                        all(setfn.approx_le(F.norm(e), v[e]) for e in range(full + 1))))
    checks.append(holds("variation.monotone", "setfn.variation-monotone",
                        all(setfn.approx_le(v[e ^ (1 << i)], v[e]) for e in range(1, full + 1) for i in range(sp.n_atoms) if e >> i & 1)))
    flags = F.flags
    if flags.monotone:
        checks.append(holds("variation.null-sets", "setfn.variation-null-sets",
                            all(setfn.is_zero(v[e]) == setfn.is_zero(F.norm(e)) for e in range(full + 1))))
    if flags.subadditive:
        ok = setfn.ScalarSetFn(sp, dict(v)).flags.additive if exact else True
        checks.append(holds("variation.additive", "setfn.variation-additive", ok))
    if flags.additive and F.kind == "scalar":
        checks.append(holds("variation.equals-measure", "setfn.variation-of-additive", all(v[e] == F(e) for e in range(full + 1))))
        sup_ok = all(v[e] == max(F(s) for s in _subs(e)) for e in range(full + 1))
        checks.append(holds("variation.sup-of-subsets", "setfn.variation-of-additive", sup_ok))
    return checks


def _subs(e):
    from .space import submasks

    return list(submasks(e))


def op_variation_suite(sc, t):
    return variation_suite(_measure(sc, t), min(8, sc.config["max_atoms"]))


def op_semivariation(sc, t):
    F = _measure(sc, t)
    pts = t.get("points")
    target = _set(sc, t) if pts is None else pts
    v = setfn.semivariation(F, target)
    checks = [holds("semivariation.value", "setfn.semivariation", True, value=v)]
    _expect(checks, t, "semivariation", "setfn.semivariation", {"value": v})
    return checks


def op_mu_tilde(sc, t):
    F = _measure(sc, t)
    v = setfn.mu_tilde(F, t.get("points", []))
    checks = [holds("mu_tilde.value", "setfn.outer-variation", True, value=v)]
    _expect(checks, t, "mu_tilde", "setfn.outer-variation", {"value": v})
    return checks


def op_integrate(sc, t):
    f, m, E = _integrand(sc, t), _measure(sc, t), _set(sc, t)
    rep = gould.integrate(f, m, E)
    ref = "gould.finite-criterion"
    checks = [holds("integrate.integrable", ref, True, value=rep.integrable),
              holds("integrate.tag-spread", ref, rep.integrable == setfn.is_zero(rep.tag_spread), value=rep.tag_spread)]
    if rep.integrable:
        checks.append(holds("integrate.value", "gould.integral-value", True, value=rep.value))
    try:
        brute = gould.tag_spread_bruteforce(f, m, rep.partition, min(5000, sc.config["max_tag_choices"]))
        checks.append(within("integrate.spread-vs-enumeration", ref, abs(rep.tag_spread - brute), _tol(sc, t, m)))
    except GouldError:
        pass
    actual = {"integrable": rep.integrable}
    if rep.integrable and m.kind == "scalar":
        actual["value"] = rep.value
    _expect(checks, t, "integrate", ref, actual)
    if rep.integrable and "expect" in t and "value" in t["expect"] and m.kind == "multi":
        want = _parse_body(t["expect"]["value"], "expect.value")
        checks.append(within("integrate.expect.value", "gould.integral-value", convex.hausdorff(rep.value, want), _tol(sc, t, m)))
    return checks


def op_integral_function(sc, t):
    m = _measure(sc, t)
    lam = gould.integral_measure(m)
    bad = gould.additivity_defect(lam)
    checks = [holds("integral_function.additive", "gould.integral-function-additive", bad is None,
                    value=None if bad is None else [set_key(bad[0]), set_key(bad[1])])]
    if m.flags.additive:
        same = all(lam(e) == m(e) for e in range(sc.space.full_mask + 1))
        checks.append(holds("integral_function.equals-additive", "gould.integral-function-of-additive", same))
    return checks


def op_integrate_multimeasure(sc, t):
    M = _measure(sc, t)
    res = gould.integrate_multimeasure(M, min(sc.config["max_atoms"], 8), float(sc.tol))
    checks = [within("multimeasure.hull", "multi.integral-closure", res.distance, _tol(sc, t, M), value=res.value),
              holds("multimeasure.bounded", "multi.integral-closure", convex.contains(res.bound, res.hull))]
    for P, Q in _chain_pairs(sc.space):
        s1, s2 = gould._sigma_one(M, P.masks), gould._sigma_one(M, Q.masks)
        checks.append(holds(f"multimeasure.monotone.{len(P)}-{len(Q)}", "multi.sums-increase-under-refinement",
                            convex.contains(s2, s1)))
    return checks


def _chain_pairs(sp):
    from .generators import dyadic_chain

    ch = dyadic_chain(sp)
    return list(zip(ch, ch[1:]))


def op_totally_measurable(sc, t):
    f, m = _integrand(sc, t), _measure(sc, t)
    eps = convex.as_fraction(t.get("eps", "1/2"))
    tm = gould.totally_measurable(f, m, eps)
    checks = [holds("totally_measurable.value", "gould.total-measurability", True, value=tm.ok)]
    _expect(checks, t, "totally_measurable", "gould.total-measurability", {"value": tm.ok})
    return checks


def op_measurability_equivalence(sc, t):
    """integrable(f, mu) iff f is totally measurable for every scheduled eps."""
    f, m = _integrand(sc, t), _measure(sc, t)
    integ = gould.integrate(f, m).integrable
    tm = all(gould.totally_measurable(f, m, eps).ok for eps in gould.default_schedule(t.get("steps", 20)))
    return [holds("measurability.equivalence", "gould.integrable-iff-totally-measurable", integ == tm, value=integ)]


def op_simple_approx(sc, t):
    f, m = _integrand(sc, t), _measure(sc, t)
    steps = gould.simple_approx(f, m, gould.default_schedule(t.get("steps", 20)))
    mts = [s.mu_tilde for s in steps]
    ok = all(s.mu_tilde < s.eps for s in steps)
    return [holds("simple_approx.exceptional-small", "gould.simple-approximation", ok, value=mts[-1] if mts else 0)]


def op_ob_bound(sc, t):
    f, m = _integrand(sc, t), _measure(sc, t)
    total = gould.ob_bound(f, m)
    integ = gould.integrate(f, m).integrable
    checks = [holds("ob.sum", "gould.oscillation-bound", (not integ) or setfn.is_zero(total), value=total)]
    if integ:
        d = gould.oscillation_defect(f, m)
        checks.append(within("ob.oscillation-bound", "gould.oscillation-bound", d, _tol(sc, t, m)))
    return checks


def _parse_chain(sc, t):
    spec = t.get("chain", "dyadic")
    if spec == "dyadic":
        from .generators import dyadic_chain

        return dyadic_chain(sc.space)
    return [Partition.from_masks(sc.space, [sc.space.mset(b).mask for b in P]) for P in spec]


def op_chain_estimator(sc, t):
    f, m = _integrand(sc, t), _measure(sc, t)
    env = gould.chain_estimator(f, m, _parse_chain(sc, t))
    tol = _tol(sc, t, m)
    checks = [holds("chain.nested", "gould.chain-envelopes", all(e.nested for e in env))]
    last = env[-1]
    spread = gould.tag_spread(f, m, last.partition)
    checks.append(within("chain.final-width", "gould.chain-envelopes", abs(last.width - spread), tol, value=last.width))
    if gould.integrate(f, m).integrable and last.partition.masks == sc.space.atoms_partition().masks:
        checks.append(within("chain.final-width-zero", "gould.chain-envelopes", last.width, tol))
    return checks


def op_series_integral(sc, t):
    m = _measure(sc, t)
    sets = [sc.space.mset(s) for s in _need(t, "sets", "series_integral")]
    val = gould.series_integral(_need(t, "coeffs", "series_integral"), sets, m)
    return [holds("series.value", "gould.discrete-series", True, value=val)]


def op_equivalence_suite(sc, t):
    f, m = _integrand(sc, t), _measure(sc, t)
    return gould.equivalence_suite(f, m, float(sc.tol))


def op_variation_of_integral(sc, t):
    return gould.variation_of_integral(_measure(sc, t), float(sc.tol))


def op_strong_ac(sc, t):
    G, M = _measure(sc, t, "gamma"), _measure(sc, t, "M")
    b = setfn.strong_ac_constant(G, M)
    b0 = setfn.strong_ac_constant(G, gould.integral_measure(M))
    checks = [holds("strong_ac.b", "rn.strong-absolute-continuity", True, value=b),
              within("strong_ac.transfer", "rn.strong-absolute-continuity", abs(b - b0), _tol(sc, t, M))]
    _expect(checks, t, "strong_ac", "rn.strong-absolute-continuity", {"b": b})
    return checks


def op_approximate_range(sc, t):
    G, M = _measure(sc, t, "gamma"), _measure(sc, t, "M")
    alpha = convex.as_fraction(t.get("alpha", "1/4"))
    r = rn.approximate_range(G, M, _set(sc, t), alpha)
    checks = [holds("range.empty", "rn.approximate-range", True, value=r.empty)]
    if not r.empty:
        checks.append(holds("range.interval", "rn.approximate-range", True, value=[r.lo, r.hi]))
        checks.append(holds("range.slack-nonneg", "rn.approximate-range",
                            all(v >= -1e-9 for v in r.slack.values()), value=min(r.slack.values(), default=0)))
    _expect(checks, t, "range", "rn.approximate-range", {"empty": r.empty})
    return checks


def range_suite(G, M, alphas=None) -> list:
    """Monotonicity of approximate ranges in alpha and E, the transfer to
    M_0, and the null-difference property of nonemptiness."""
    sp = M.space
    alphas = alphas or [Fraction(0), Fraction(1, 8), Fraction(1, 2), Fraction(2)]
    eng = rn.RangeEngine(G, M)
    mono_a = mono_e = transfer = True
    for e in range(1, sp.full_mask + 1):
        prev = None
        for a in sorted(alphas):
            b = eng.bounds(e, a)
            if prev is not None and not _subset(prev, b):
                mono_a = False
            prev = b
            for i in range(sp.n_atoms):
                if e >> i & 1:
                    if not _subset(b, eng.bounds(e ^ (1 << i), a)) and e ^ (1 << i):
                        mono_e = False
            if G.flags.additive and not rn.transfer_holds(G, M, e, a):
                transfer = False
    checks = [holds("range.monotone-alpha", "rn.range-monotone", mono_a),
              holds("range.monotone-set", "rn.range-monotone", mono_e)]
    if G.flags.additive:
        checks.append(holds("range.transfer-M0", "rn.range-transfer", transfer))
    try:
        setfn.strong_ac_constant(G, M)
        dominated = True
    except GouldError:
        dominated = False
    if dominated and G.flags.additive:
        vM = M.variation_measure
        for a in alphas:
            if a == 0:
                continue
            ok, wit = setfn.check_null_difference(vM, lambda F: eng.bounds(F.mask, a) is not None)
            checks.append(holds(f"range.null-difference.{a}", "rn.null-difference", ok,
                                value=None if ok else [w.key() for w in wit]))
    return checks


def _subset(a, b):
    """Interval a inside interval b (None is empty)."""
    if a is None:
        return True
    if b is None:
        return False
    lo_ok = a[0] >= b[0] - rn._tol(b[0])
    if b[1] is None:
        return lo_ok
    return lo_ok and a[1] is not None and a[1] <= b[1] + rn._tol(b[1])


def op_range_suite(sc, t):
    G, M = _measure(sc, t, "gamma"), _measure(sc, t, "M")
    alphas = [convex.as_fraction(a) for a in t["alphas"]] if "alphas" in t else None
    return range_suite(G, M, alphas)


def op_check_exhaustive(sc, t):
    G, M = _measure(sc, t, "gamma"), _measure(sc, t, "M")
    alpha = convex.as_fraction(t.get("alpha", "1/4"))
    try:
        res = rn.check_exhaustive_hypothesis(G, M, alpha, _set(sc, t))
        ok, val = True, [B.key() for B in res.exhaustion]
    except NoExhaustion as exc:
        ok, val = False, str(exc)
    checks = [holds("exhaustive.found", "rn.exhaustive-hypothesis", True, value=val)]
    _expect(checks, t, "exhaustive", "rn.exhaustive-hypothesis", {"found": ok})
    return checks


def op_rn(sc, t, artifacts=None):
    G, M = _measure(sc, t, "gamma"), _measure(sc, t, "M")
    tol = convex.as_fraction(t.get("tol", "1e-6"))
    want_fail = t.get("expect_failure")
    try:
        res = rn.rn_derive(G, M, tol)
    except HypothesisFailed as exc:
        if want_fail is not None:
            return [holds("rn.hypothesis-failed", "rn.hypothesis-falsification", exc.reason == want_fail, value=str(exc))]
        raise
    if want_fail is not None:
        return [holds("rn.hypothesis-failed", "rn.hypothesis-falsification", False, value="derivative produced")]
    if artifacts is not None:
        artifacts["rn"] = res.to_json()
    rep = rn.verify_rn(G, M, res.derivative, tol)
    d = res.diagnostics
    checks = [
        within("rn.stage-bound", "rn.stage-values-bounded", d["max_r"], d["r_bound"], value=d["max_r"]),
        within("rn.cauchy", "rn.stage-cauchy-bound", d["cauchy_ratio"], 1, value=d["cauchy_ratio"]),
        holds("rn.derivative", "rn.derivative", True, value=list(res.derivative.atom_values())),
    ]
    checks.extend(rep.checks)
    if "expect" in t and "derivative" in t["expect"]:
        want = [convex.as_fraction(x) for x in t["expect"]["derivative"]]
        got = res.derivative.atom_values()
        err = max(abs(a - b) for a, b in zip(got, want))
        checks.append(within("rn.expect.derivative", "rn.derivative", err, Fraction(2) ** (3 - res.N), value=err))
    return checks


def op_verify_rn(sc, t):
    G, M = _measure(sc, t, "gamma"), _measure(sc, t, "M")
    f = _integrand(sc, t)
    rep = rn.verify_rn(G, M, f, convex.as_fraction(t.get("tol", "1e-6")))
    checks = rep.checks
    if "expect" in t and "ok" in t["expect"]:
        checks = [holds("verify.expect.ok", "rn.derivative-identity", rep.ok == t["expect"]["ok"],
                        value=rep.violations)]
    return checks


def op_convex_suite(sc, t):
    from .audit import convex_suite

    bodies = [_parse_body(b, "bodies") for b in _need(t, "bodies", "convex_suite")]
    return convex_suite(bodies, [convex.as_fraction(a) for a in t.get("scalars", ["1/2", "2"])])


def op_partition_suite(sc, t):
    sp = sc.space
    if sp.n_atoms > 5:
        return [holds("partition.skipped", "space.refinement-order", True, value="too many atoms")]
    parts = list(enumerate_partitions(sp.full))
    from .space import bell

    checks = [holds("partition.bell", "space.partition-count", len(parts) == bell(sp.n_atoms), value=len(parts))]
    order = join = True
    atoms = sp.atoms_partition()
    for P in parts:
        if not is_refinement(P, P) or not is_refinement(P, atoms):
            order = False
        for Q in parts:
            J = common_refinement(P, Q)
            if not (is_refinement(P, J) and is_refinement(Q, J)):
                join = False
            if is_refinement(P, Q) and is_refinement(Q, P) and P != Q:
                order = False
        # least upper bound: anything refining P and Q refines the join
    for P in parts[:: max(1, len(parts) // 6)]:
        for Q in parts[:: max(1, len(parts) // 6)]:
            J = common_refinement(P, Q)
            for R in parts:
                if is_refinement(P, R) and is_refinement(Q, R) and not is_refinement(J, R):
                    join = False
    checks.append(holds("partition.order", "space.refinement-order", order))
    checks.append(holds("partition.join", "space.common-refinement", join))
    return checks


OPS = {
    "classify": op_classify,
    "variation": op_variation,
    "variation_suite": op_variation_suite,
    "semivariation": op_semivariation,
    "mu_tilde": op_mu_tilde,
    "integrate": op_integrate,
    "integral_function": op_integral_function,
    "integrate_multimeasure": op_integrate_multimeasure,
    "totally_measurable": op_totally_measurable,
    "measurability_equivalence": op_measurability_equivalence,
    "simple_approx": op_simple_approx,
    "ob_bound": op_ob_bound,
    "chain_estimator": op_chain_estimator,
    "series_integral": op_series_integral,
    "equivalence_suite": op_equivalence_suite,
    "variation_of_integral": op_variation_of_integral,
    "strong_ac": op_strong_ac,
    "approximate_range": op_approximate_range,
    "range_suite": op_range_suite,
    "check_exhaustive": op_check_exhaustive,
    "rn": op_rn,
    "verify_rn": op_verify_rn,
    "convex_suite": op_convex_suite,
    "partition_suite": op_partition_suite,
}


# -- running -------------------------------------------------------------------


@dataclass
class TaskResult:
    index: int
    op: str
    checks: list
    artifacts: dict
    error: str | None = None


def run_tasks(sc: Scenario, prefix: str = "") -> list:
    """Execute every task; package errors become failed checks.  Anything
    else propagates (an infrastructure error)."""
    out = []
    for i, t in enumerate(sc.tasks):
        op = t["op"]
        tid = t.get("id", f"{prefix}{i}:{op}")
        artifacts = {}
        try:
            if op == "rn":
                checks = op_rn(sc, t, artifacts)
            else:
                checks = OPS[op](sc, t)
            err = None
        except GouldError as exc:
            checks = [Check("error", "task", False, value=f"{type(exc).__name__}: {exc}")]
            err = str(exc)
        for c in checks:
            c.id = f"{tid}:{c.id}"
        out.append(TaskResult(i, op, checks, artifacts, err))
    return out


CSV_COLUMNS = ["id", "ref", "status", "value", "tolerance", "residual"]


def write_reports(out_dir, results, meta: dict) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    rows = [c.row() for r in results for c in r.checks]
    failed = sum(1 for row in rows if row["status"] != "pass")
    report = dict(meta)
    report["checks"] = rows
    report["summary"] = {"total": len(rows), "passed": len(rows) - failed, "failed": failed}
    report["tasks"] = [
        {"index": r.index, "op": r.op, "status": "pass" if all(c.ok for c in r.checks) else "fail",
         "error": r.error, "artifacts": r.artifacts}
        for r in results
    ]
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False))
        fh.write("\n")
    with open(os.path.join(out_dir, "report.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for row in rows:
            w.writerow([_cell(row[c]) for c in CSV_COLUMNS])
    return report


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (str, int, float)):
        return v
    return json.dumps(v, sort_keys=True, ensure_ascii=False)


def run(sc: Scenario, out_dir, tol=None) -> int:
    """Run a loaded scenario and write the reports; returns the exit status."""
    if tol is not None:
        sc.config["tol"] = convex.as_fraction(tol)
    results = run_tasks(sc)
    report = write_reports(out_dir, results, {"scenario": sc.name, "tol": jsonable(sc.tol)})
    return EXIT_PASS if report["summary"]["failed"] == 0 else EXIT_FAIL

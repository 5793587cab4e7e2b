"""Randomized property audit over every module.

The audit draws seeded random scenarios, runs the property tasks of the
scenario runner on each one and writes the usual reports.  When a check
fails, the failing scenario with the fewest atoms is written to
``counterexample.json`` so it can be replayed with ``run``.
"""
from __future__ import annotations

import itertools
import json
import math
import os
import random
from fractions import Fraction

from . import convex, generators
from .checks import holds, within
from .convex import embed, hausdorff, hausdorff_excess, minkowski_sum
from .scenario import EXIT_FAIL, EXIT_PASS, Scenario, run_tasks, scenario_to_dict, write_reports
from .setfn import MultiSetFn

INJECTIONS = ("mislabeled-subadditive",)


def convex_suite(bodies, scalars=(Fraction(1, 2), Fraction(2))) -> list:
    """Metric, translation, Lipschitz, closure and embedding properties on
    all pairs and triples of ``bodies`` (one common dimension)."""
    dim = bodies[0].dim
    tol = 0 if dim == 1 else 1e-9
    H = {}
    for A, B in itertools.product(range(len(bodies)), repeat=2):
        H[A, B] = hausdorff(bodies[A], bodies[B])
    n = len(bodies)
    sym = max(abs(H[i, j] - H[j, i]) for i in range(n) for j in range(n))
    ident = all((H[i, j] <= tol) == (bodies[i] == bodies[j]) for i in range(n) for j in range(n))
    tri = max(H[i, k] - H[i, j] - H[j, k] for i in range(n) for j in range(n) for k in range(n))
    checks = [
        within("hausdorff.symmetry", "convex.metric", sym, tol),
        holds("hausdorff.identity", "convex.metric", ident),
        within("hausdorff.triangle", "convex.metric", max(tri, 0), tol),
    ]
    c = Fraction(1, 3) if dim == 1 else (Fraction(1, 3), Fraction(-1, 2))
    shift = max(abs(hausdorff(convex.translate(bodies[i], c), convex.translate(bodies[j], c)) - H[i, j])
                for i in range(n) for j in range(n))
    checks.append(within("hausdorff.translation", "convex.translation-invariance", shift, tol))
    pts = [v for B in bodies for v in (B.vertices if dim == 2 else (B.lo, B.hi))]
    lip = 0
    for A in bodies:
        for p, q in itertools.combinations(pts[:8], 2):
            pq = abs(p - q) if dim == 1 else math.hypot(p[0] - q[0], p[1] - q[1])
            gap = abs(convex.point_distance(p, A) - convex.point_distance(q, A)) - pq
            lip = max(lip, gap)
    checks.append(within("distance.lipschitz", "convex.distance-lipschitz", max(lip, 0), 1e-9))
    hull_gap = 0
    P = convex.mk_body(pts) if dim == 2 else convex.interval(min(pts), max(pts))
    for A in bodies:
        e_pts = max(convex.point_distance(p, A) for p in pts)
        hull_gap = max(hull_gap, abs(e_pts - convex.excess(P, A)))
    checks.append(within("excess.hull", "convex.excess-of-hull", hull_gap, 1e-9))
    iso = max(abs(H[i, j] - (embed(bodies[i]) - embed(bodies[j])).norm()) for i in range(n) for j in range(n))
    checks.append(within("embedding.isometry", "convex.embedding-isometry", iso, tol))
    lin = 0
    for (i, j), a, b in itertools.product(itertools.combinations(range(n), 2), scalars, scalars):
        A, C = bodies[i], bodies[j]
        lhs = embed(minkowski_sum(convex.scale(a, A), convex.scale(b, C)))
        rhs = embed(A) * a + embed(C) * b
        lin = max(lin, (lhs - rhs).norm())
    checks.append(within("embedding.linear", "convex.embedding-linear", lin, tol))
    mx = 0
    for i, j in itertools.combinations(range(n), 2):
        A, C = bodies[i], bodies[j]
        J = convex.hull_union(A, C)
        dirs = (1, -1) if dim == 1 else convex.normal_fan(A, C, J)
        for u in dirs:
            if dim == 2:
                u = (float(u[0]), float(u[1]))
            mx = max(mx, abs(convex.support(J, u) - max(convex.support(A, u), convex.support(C, u))))
    checks.append(within("embedding.hull-max", "convex.embedding-hull", mx, 1e-12))
    seq = [bodies[0]]
    for B in bodies[1:]:
        seq.append(convex.hull_union(seq[-1], B))
    lim = convex.increasing_limit(seq, seq[-1])
    checks.append(holds("embedding.limit", "convex.increasing-limit", lim.body == seq[-1], value=lim.distances[0]))
    assoc = comm = excess_ok = True
    for A, B, C in itertools.combinations(bodies, 3):
        assoc &= minkowski_sum(minkowski_sum(A, B), C) == minkowski_sum(A, minkowski_sum(B, C))
    for A, B in itertools.combinations(bodies, 2):
        comm &= minkowski_sum(A, B) == minkowski_sum(B, A)
        excess_ok &= abs(hausdorff_excess(A, B) - hausdorff(A, B)) <= (0 if dim == 1 else 1e-9)
    checks.append(holds("minkowski.associative", "convex.minkowski-algebra", assoc))
    checks.append(holds("minkowski.commutative", "convex.minkowski-algebra", comm))
    checks.append(holds("hausdorff.two-forms", "convex.hausdorff-two-forms", excess_ok))
    return checks


def _square_interval(sp):
    return MultiSetFn.from_function(sp, lambda E: convex.interval(0, len(E) ** 2))


def make_case(rng: random.Random, n_atoms: int, dim: int, inject=None) -> Scenario:
    sp = generators.space(rng, n_atoms)
    mu = generators.scalar_any(rng, sp)
    lam = generators.scalar_additive(rng, sp)
    sub = generators.scalar_submeasure(rng, sp)
    M = generators.multisubmeasure(rng, sp, dim)
    G, Ma, s = generators.rn_pair(rng, sp, dim)
    f = generators.integrand(rng, sp, nonneg=True)
    g = generators.integrable_integrand(rng, sp, M, nonneg=True)
    measures = {"mu": mu, "lam": lam, "sub": sub, "M": M, "G": G, "Ma": Ma}
    integrands = {"f": f, "g": g}
    bodies = [generators.body(rng, dim) for _ in range(4)]
    tasks = [
        {"op": "convex_suite", "bodies": [b.to_json() for b in bodies]},
        {"op": "partition_suite"},
        {"op": "classify", "measure": "lam", "expect": {"additive": True}},
        {"op": "classify", "measure": "sub", "expect": {"monotone": True, "subadditive": True}},
        {"op": "classify", "measure": "M", "expect": {"monotone": True, "subadditive": True}},
        {"op": "classify", "measure": "Ma", "expect": {"additive": True}},
        {"op": "variation_suite", "measure": "mu"},
        {"op": "variation_suite", "measure": "sub"},
        {"op": "variation_suite", "measure": "M"},
        {"op": "integrate", "integrand": "f", "measure": "mu"},
        {"op": "integrate", "integrand": "f", "measure": "M"},
        {"op": "integral_function", "measure": "mu"},
        {"op": "integral_function", "measure": "M"},
        {"op": "equivalence_suite", "integrand": "f", "measure": "mu"},
        {"op": "equivalence_suite", "integrand": "f", "measure": "M"},
        {"op": "variation_of_integral", "measure": "M"},
        {"op": "integrate_multimeasure", "measure": "M"},
        {"op": "measurability_equivalence", "integrand": "f", "measure": "sub"},
        {"op": "chain_estimator", "integrand": "f", "measure": "lam"},
        {"op": "ob_bound", "integrand": "g", "measure": "M"},
        {"op": "strong_ac", "gamma": "G", "M": "Ma"},
        {"op": "range_suite", "gamma": "G", "M": "Ma"},
        {"op": "rn", "gamma": "G", "M": "Ma", "tol": "1/1000",
         "expect": {"derivative": [str(x) for x in s]}},
    ]
    if inject == "mislabeled-subadditive":
        measures["Minj"] = _square_interval(sp)
        tasks.append({"op": "classify", "measure": "Minj", "expect": {"subadditive": True}})
    config = {"tol": Fraction(1, 10**9), "max_atoms": 10, "max_tag_choices": 10**6, "seed": 0}
    return Scenario(sp, measures, integrands, tasks, config, name=f"audit-{n_atoms}-d{dim}")


def audit(out_dir, max_atoms: int = 4, seed: int = 1, cases_per_size: int = 2, inject=None) -> int:
    """Run the randomized property audit; returns the exit status."""
    if not 1 <= max_atoms <= 10:
        raise ValueError("max_atoms must be between 1 and 10")
    if inject is not None and inject not in INJECTIONS:
        raise ValueError(f"unknown injection {inject!r}")
    rng = random.Random(seed)
    results, failing = [], []
    k = 0
    for n in range(1, max_atoms + 1):
        for rep in range(cases_per_size):
            dim = 1 + (k % 2)
            sc = make_case(rng, n, dim, inject)
            res = run_tasks(sc, prefix=f"case{k}/")
            results.extend(res)
            bad = [r for r in res if not all(c.ok for c in r.checks)]
            if bad:
                failing.append((n, k, sc, bad))
            k += 1
    meta = {"audit": {"seed": seed, "max_atoms": max_atoms, "cases": k, "inject": inject}}
    report = write_reports(out_dir, results, meta)
    if failing:
        n, k, sc, bad = min(failing, key=lambda x: (x[0], x[1]))
        tasks = [sc.tasks[r.index] for r in bad]
        data = scenario_to_dict(sc.space, sc.measures, sc.integrands, tasks, sc.config, name=f"counterexample-case{k}")
        with open(os.path.join(out_dir, "counterexample.json"), "w", encoding="utf-8") as fh:
            fh.write(json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False))
            fh.write("\n")
    return EXIT_PASS if report["summary"]["failed"] == 0 else EXIT_FAIL

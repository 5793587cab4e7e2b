"""Radon-Nikodym derivative of Gamma = s M for a known density s.

    python docs/examples/demo_rn.py
"""
from fractions import Fraction

from gouldrn.convex import polygon, scale
from gouldrn.rn import rn_derive, stages_needed, verify_rn
from gouldrn.setfn import MultiSetFn, strong_ac_constant
from gouldrn.space import FiniteSpace

sp = FiniteSpace.discrete(3)
bodies = [polygon([(0, 0), (1, 0), (0, 1)]), polygon([(0, 0), (1, 1)]), polygon([(-1, 0), (1, 0), (0, 1)])]
s = [Fraction(3, 2), Fraction(1, 4), 2]
M = MultiSetFn.additive(sp, bodies)
G = MultiSetFn.additive(sp, [scale(c, K) for c, K in zip(s, bodies)])

print("strong absolute continuity constant b =", strong_ac_constant(G, M))
tol = Fraction(1, 1000)
print("stages needed for tol", tol, "=", stages_needed(tol))
res = rn_derive(G, M, tol)
print("derivative on atoms:", [str(x) for x in res.derivative.values], " expected:", [str(x) for x in s])
for k, st in enumerate(res.approximants[:4]):
    print(f"  stage {k + 1}:", [str(x) for x in st])
rep = verify_rn(G, M, res.derivative, tol)
print("verified:", rep.ok, " max residual:", rep.max_residual)

"""Gould integrals on a three-atom space, against a scalar submeasure and
against an interval-valued multisubmeasure.

    python docs/examples/demo_gould.py
"""
from fractions import Fraction

from gouldrn.convex import interval
from gouldrn.gould import Integrand, integral_measure, integrate
from gouldrn.setfn import MultiSetFn, ScalarSetFn, classify, variation
from gouldrn.space import FiniteSpace

sp = FiniteSpace.from_sizes([2, 1, 2])
print("points", sp.n_points, "atoms", sp.n_atoms)

# a submeasure that is not additive: mu grows concavely with the atom count
mu = ScalarSetFn.from_function(sp, lambda E: [0, 1, Fraction(3, 2), 2][len(E)])
print("mu flags:", classify(mu).as_dict())
print("v_mu(S) =", variation(mu, sp.full_mask))

f = Integrand(sp, [1, 1, 4, Fraction(1, 2), Fraction(1, 2)])
r = integrate(f, mu)
print("f constant on atoms, integrable:", r.integrable, "value:", r.value)

osc = Integrand(sp, [0, 1, 4, 0, 0])
print("f oscillating on a non-null atom, integrable:", integrate(osc, mu).integrable)

lam = integral_measure(mu)
print("integral function lambda(S) =", lam(sp.full_mask), "(additive, equals v_mu(S))")

M = MultiSetFn.from_function(sp, lambda E: interval(0, len(E)) if len(E) < 3 else interval(0, 2))
print("M flags:", classify(M).as_dict())
print("integral of f dM =", integrate(f, M).value.to_json())

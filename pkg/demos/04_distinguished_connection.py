"""Distinguished linear connections: the full identity machine.

The Berwald connection of a nonlinear connection drives covariant
differentiation of arbitrary mixed tensors.  Torsion and curvature exist
twice (component formulas and defining operators); Ricci and Bianchi
identities close the suite.  Everything is checked as pointwise residuals.
"""

import numpy as np

from algebroid_engine import (
    berwald_dconnection, bianchi_check, canonical_connection, fr6_check,
    operator_component_checks, ricci_check, sample_box, torsion_components,
    evaluate,
)
from algebroid_engine.connection import TangentSection
from algebroid_engine.sampling import random_poly_expr
from demos_common import quadratic_system

sys = quadratic_system()
conn = canonical_connection(sys)
dc = berwald_dconnection(conn)
samples = sample_box(sys.m, sys.r, 100, seed=42)

print("operator vs component families")
for res in operator_component_checks(dc, samples[:40], 1e-8):
    print("  ", res.pretty())

tor = torsion_components(dc)
p = samples[0]
print("hh-torsion at a point (zero for a symmetric quadratic spray):",
      [[evaluate(tor['T'][a][b][c], p.x, p.y) for c in range(2)]
       for a in range(2) for b in range(2)])

rng = np.random.default_rng(7)


def random_section():
    return TangentSection(
        tuple(random_poly_expr(rng, sys.m, sys.r) for _ in range(sys.r)),
        tuple(random_poly_expr(rng, sys.m, sys.r) for _ in range(sys.r)))


Y = random_section()
print("Ricci-type formulas")
for res in ricci_check(dc, Y, samples, 1e-7):
    print("  ", res.pretty())

X, Yb, Z, U = (random_section() for _ in range(4))
print("Bianchi identities (operator form)")
for res in bianchi_check(dc, X, Yb, Z, U, samples[:15], 1e-7):
    print("  ", res.pretty())

print("splitting identities (Remark fr6)")
for res in fr6_check(dc, X, Yb, Z, U, samples[:15], 1e-10):
    print("  ", res.pretty())

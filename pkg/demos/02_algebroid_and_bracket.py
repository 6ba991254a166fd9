"""A generalized Lie algebroid with every twist active.

The structure is a rank-3 bundle over the line with non-constant anchor
rho = (1, x1, 0), non-constant structure functions, and affine base
diffeomorphisms h, eta.  The bracket of pull-back sections only
differentiates along the base, with everything composed through h.
"""

from algebroid_engine import (
    DiffeoMap, GenAlgebroid, PullbackSection, pullback_bracket,
    validate_axioms, sample_box, parse, evaluate,
)
from algebroid_engine.algebroid import coordinate_section
from algebroid_engine.expr import ZERO, const, xvar

m, r = 1, 3
rho = [[const(1.0), xvar(1), ZERO]]
L = {(0, 0, 1): const(1.0),                 # [S1, S2] = S1
     (2, 0, 2): xvar(1),                    # [S1, S3] = x1 S3
     (2, 1, 2): parse("x1^2", m, 0)}        # [S2, S3] = x1^2 S3
h = DiffeoMap((parse("x1+1", m, 0),), (parse("x1-1", m, 0),))
eta = DiffeoMap((parse("2*x1+1", m, 0),), (parse("(x1-1)/2", m, 0),))
alg = GenAlgebroid(m, r, rho, L, h=h, eta=eta)

samples = sample_box(m, r, 100, seed=42)
print("axiom report")
for res in validate_axioms(alg, samples, 1e-9):
    print("  ", res.pretty())

# bracket of the first two coordinate sections: the structure functions
# composed with h reappear as coefficients
S1, S2 = coordinate_section(r, 0), coordinate_section(r, 1)
br = pullback_bracket(alg, S1, S2)
print("[S1, S2] coefficients at x = 0.25:",
      [evaluate(c, (0.25,), (0.0,) * r) for c in br.coeff])

# Leibniz twist: multiplying one argument by a function adds an anchor
# derivative term
f = parse("x1^2 + 1", m, r)
fS2 = PullbackSection(tuple(f * c for c in S2.coeff))
br2 = pullback_bracket(alg, S1, fS2)
p = samples[0]
lhs = [evaluate(c, p.x, p.y) for c in br2.coeff]
fval = evaluate(f, p.x, p.y)
base = [fval * evaluate(c, p.x, p.y) for c in br.coeff]
print("Leibniz defect (should equal rho(f') in slot 2):",
      [u - v for u, v in zip(lhs, base)])

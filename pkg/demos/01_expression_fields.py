"""Expression fields: the carrier of all smooth data.

Every field the engine consumes (anchors, structure functions, connection
coefficients, sprays, forces) is a string in a tiny arithmetic grammar over
base coordinates x1..xm and fiber coordinates y1..yr.  Parsed trees are
immutable, evaluate to IEEE doubles and differentiate exactly.
"""

from algebroid_engine import parse, evaluate, diff
from algebroid_engine.expr import Var, xvar, yvar

m, r = 2, 2

# parsing and printing round-trip structurally
e = parse("sin(x1)^2 + x2*y1 - y2/(1+x1^2)", m, r)
print("field:        ", e)
print("re-parsed ok: ", parse(str(e), m, r) == e)

# evaluation is pointwise with explicit domain errors, never silent NaN
x, y = (0.3, -1.2), (0.7, 0.25)
print("value:        ", evaluate(e, x, y))

# derivatives are exact trees, closed under repetition
d1 = diff(e, xvar(1))
d2 = diff(d1, yvar(2))
print("d/dx1:        ", d1)
print("d2/dx1 dy2:   ", d2)

# third derivatives stay exact (the projective-change theorems need them)
g = parse("y1^2*y2/(1+x1^2)", m, r)
d3 = diff(diff(diff(g, yvar(1)), yvar(1)), yvar(2))
print("d3 of spray-like field:", d3, "->", evaluate(d3, x, y))

# the symbolic derivative agrees with central finite differences
step = 1e-6
fd = (evaluate(e, (x[0] + step, x[1]), y) - evaluate(e, (x[0] - step, x[1]), y)) / (2 * step)
print("fd check:      |exact - fd| =", abs(evaluate(d1, x, y) - fd))

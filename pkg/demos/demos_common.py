"""Shared fixtures for the demo scripts."""

from algebroid_engine import DiffeoMap, GenAlgebroid, GhMorphism, MechSystem
from algebroid_engine.algebroid import identity_morphism
from algebroid_engine.expr import ZERO, const, parse, xvar, yvar


def nontrivial_algebroid() -> GenAlgebroid:
    """Rank-3 generalized Lie algebroid over the line with non-constant
    anchor and structure functions and affine base diffeomorphisms."""
    m, r = 1, 3
    rho = [[const(1.0), xvar(1), ZERO]]
    L = {(0, 0, 1): const(1.0), (2, 0, 2): xvar(1),
         (2, 1, 2): parse("x1^2", m, 0)}
    h = DiffeoMap((parse("x1+1", m, 0),), (parse("x1-1", m, 0),))
    eta = DiffeoMap((parse("2*x1+1", m, 0),), (parse("(x1-1)/2", m, 0),))
    return GenAlgebroid(m, r, rho, L, h=h, eta=eta)


def quadratic_system(m=2, r=2) -> MechSystem:
    """Identity-anchor system on the plane with a constant-coefficient
    quadratic spray."""
    ghat = [[[0.5, 0.1], [0.1, -0.3]], [[0.2, 0.0], [0.0, 0.4]]]
    rho = [[const(1.0) if i == a else ZERO for a in range(r)] for i in range(m)]
    alg = GenAlgebroid(m, r, rho, {})
    G = []
    for a in range(r):
        acc = ZERO
        for b in range(r):
            for c in range(r):
                acc = acc + const(0.5 * ghat[a][b][c]) * yvar(b + 1) * yvar(c + 1)
        G.append(acc)
    return MechSystem(alg, identity_morphism(r), (ZERO,) * r, tuple(G))

import math

import pytest

from algebroid_engine.algebroid import (
    DiffeoMap, GenAlgebroid, GhMorphism, PullbackSection,
    anchored_action, coordinate_section, identity_map, identity_morphism,
    pullback_bracket, validate_axioms,
)
from algebroid_engine.expr import ZERO, const, evaluate, parse, xvar

from helpers import central_fd, rng_for, random_poly_expr, sample_points


def classical_algebroid(m, r, rho, L):
    return GenAlgebroid(m, r, rho, L)


def abelian(m=2, r=2):
    rho = [[const(1.0) if i == a else ZERO for a in range(r)] for i in range(m)]
    return classical_algebroid(m, r, rho, {})


def test_anchored_action_classical_identity():
    alg = abelian()
    u = coordinate_section(2, 0)
    out = anchored_action(alg, u, xvar(1))
    assert evaluate(out, (0.3, -0.2), ()) == 1.0


def test_anchored_action_kills_constants():
    alg = abelian()
    for a in range(2):
        out = anchored_action(alg, coordinate_section(2, a), const(4.0))
        assert evaluate(out, (0.5, 0.5), ()) == 0.0


def test_anchored_action_chain_factor():
    # h(x) = 2x on R, eta = id, rho = 1, u = s_1, f = x1: value 2 everywhere.
    # Cross-check by finite differences of f along the flow of the realized
    # field w = (anchored action) d/dx: here w(x) must satisfy w = 2.
    m = r = 1
    h = DiffeoMap((parse("2*x1", 1, 0),), (parse("x1/2", 1, 0),))
    alg = GenAlgebroid(m, r, [[const(1.0)]], {}, h=h, eta=identity_map(1))
    out = anchored_action(alg, coordinate_section(1, 0), xvar(1))
    for x in (-0.7, 0.0, 0.4):
        val = evaluate(out, (x,), ())
        assert abs(val - 2.0) < 1e-12
        # FD oracle: f(x + t w) differentiated at t=0 equals w * f'(x) = w
        t = 1e-6
        fd = ((x + t * val) - (x - t * val)) / (2 * t)
        assert abs(val - fd) < 1e-6


def test_anchored_action_classical_reduction_random_data():
    # with identity h and eta, the action collapses to rho^i_a u^a d_i f
    m, r = 2, 3
    rng = rng_for("anchored-classical")
    rho = [[random_poly_expr(rng, m, 0, fiber=False) for _ in range(r)]
           for _ in range(m)]
    alg = GenAlgebroid(m, r, rho, {})
    u = PullbackSection(tuple(random_poly_expr(rng, m, 0, fiber=False)
                              for _ in range(r)))
    f = random_poly_expr(rng, m, 0, fiber=False)
    out = anchored_action(alg, u, f)
    from algebroid_engine.expr import x_deriv
    for p in sample_points(m, r, 30, seed=6):
        want = sum(evaluate(rho[i][a], p.x, ()) * evaluate(u.coeff[a], p.x, ())
                   * evaluate(x_deriv(f, i), p.x, ())
                   for i in range(m) for a in range(r))
        got = evaluate(out, p.x, ())
        assert abs(got - want) < 1e-12 * (1 + abs(want))


def test_pullback_bracket_constant_sections_give_structure_functions():
    # [S_a, S_b] = L^c_{ab} o h o pi
    m, r = 1, 2
    L = {(0, 0, 1): xvar(1)}          # L^1_{12} = x1
    rho = [[const(1.0), ZERO]]
    h = DiffeoMap((parse("x1+1", 1, 0),), (parse("x1-1", 1, 0),))
    alg = GenAlgebroid(m, r, rho, L, h=h)
    out = pullback_bracket(alg, coordinate_section(r, 0), coordinate_section(r, 1))
    assert evaluate(out.coeff[0], (0.25,), (0.0, 0.0)) == 1.25  # x1+1
    assert out.coeff[1] == ZERO


def test_pullback_bracket_antisymmetry_on_itself():
    alg = abelian()
    rng = rng_for("bracket-xx")
    X = PullbackSection(tuple(random_poly_expr(rng, 2, 2) for _ in range(2)))
    out = pullback_bracket(alg, X, X)
    for p in sample_points(2, 2, 25, seed=5):
        for c in range(2):
            assert abs(evaluate(out.coeff[c], p.x, p.y)) < 1e-12


def test_pullback_bracket_leibniz():
    # [S_a, f S_b] - f [S_a, S_b] = (rho^i_a o h o pi) d_i f  S_b
    m, r = 2, 2
    rng = rng_for("bracket-leibniz")
    rho = [[random_poly_expr(rng, m, 0, fiber=False) for _ in range(r)]
           for _ in range(m)]
    L = {(0, 0, 1): random_poly_expr(rng, m, 0, fiber=False)}
    h = DiffeoMap((parse("x1+1", 2, 0), parse("x2-2", 2, 0)),
                  (parse("x1-1", 2, 0), parse("x2+2", 2, 0)))
    alg = GenAlgebroid(m, r, rho, L, h=h)
    f = random_poly_expr(rng, m, r)
    a, b = 0, 1
    Sa, Sb = coordinate_section(r, a), coordinate_section(r, b)
    fSb = PullbackSection(tuple(f * e for e in Sb.coeff))
    lhs = pullback_bracket(alg, Sa, fSb)
    base = pullback_bracket(alg, Sa, Sb)
    for p in sample_points(m, r, 50, seed=11):
        drift = sum(evaluate(alg.rho_h(i, a), p.x, p.y) *
                    evaluate(parse(str(f), m, r).diff(xvar(i + 1)), p.x, p.y)
                    for i in range(m))
        for c in range(r):
            got = (evaluate(lhs.coeff[c], p.x, p.y)
                   - evaluate(f, p.x, p.y) * evaluate(base.coeff[c], p.x, p.y))
            want = drift if c == b else 0.0
            assert abs(got - want) < 1e-10


def test_validate_axioms_abelian_all_zero():
    alg = abelian()
    results = validate_axioms(alg, sample_points(2, 2, 20, seed=1), 1e-9,
                              gh=identity_morphism(2))
    assert all(r.status == "pass" for r in results)
    assert all(r.max_residual == 0.0 for r in results)


def test_validate_axioms_heisenberg_jacobi_zero():
    # L^3_{12} = 1, all else 0, rho = 0: nilpotent constants
    m, r = 2, 3
    rho = [[ZERO] * r for _ in range(m)]
    alg = GenAlgebroid(m, r, rho, {(2, 0, 1): const(1.0)})
    results = validate_axioms(alg, sample_points(m, r, 20, seed=2), 1e-9)
    jac = [res for res in results if res.name == "Jacobi identity"][0]
    assert jac.status == "pass" and jac.max_residual == 0.0


def test_validate_axioms_detects_jacobi_violation():
    # brute-force search over small integer tensors found this violator:
    # L^1_{12} = 1, L^2_{23} = 1, rho = 0 has cyclic residual S_1 (magnitude 1)
    m, r = 1, 3
    rho = [[ZERO] * r]
    alg = GenAlgebroid(m, r, rho, {(0, 0, 1): const(1.0), (1, 1, 2): const(1.0)})
    results = validate_axioms(alg, sample_points(m, r, 10, seed=3), 1e-9)
    jac = [res for res in results if res.name == "Jacobi identity"][0]
    assert jac.status == "fail"
    assert abs(jac.max_residual - 1.0) < 1e-12


def test_validate_axioms_flags_bad_inverse():
    h = DiffeoMap((parse("2*x1", 1, 0),), (parse("x1", 1, 0),))  # wrong inverse
    alg = GenAlgebroid(1, 1, [[const(1.0)]], {}, h=h)
    results = validate_axioms(alg, sample_points(1, 1, 10, seed=4), 1e-9)
    assert any(r.status == "fail" and "h inverse" in r.name for r in results)


def test_structure_function_antisymmetry_is_structural():
    alg = GenAlgebroid(1, 2, [[ZERO, ZERO]], {(0, 0, 1): xvar(1)})
    assert alg.L(0, 1, 0) == -xvar(1)
    assert alg.L(0, 0, 0) == ZERO
    with pytest.raises(ValueError):
        GenAlgebroid(1, 2, [[ZERO, ZERO]], {(0, 1, 0): xvar(1)})

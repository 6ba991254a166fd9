import pytest

from algebroid_engine.algebroid import (
    DiffeoMap, GenAlgebroid, GhMorphism, identity_map, identity_morphism,
)
from algebroid_engine.connection import NlConnection, TangentSection
from algebroid_engine.dconn import berwald_dconnection
from algebroid_engine.expr import ZERO, const, evaluate, parse, xvar, yvar
from algebroid_engine.mech import (
    MechSystem, canonical_U, canonical_connection, deviation_section,
    hessian, hessian_lemma_residuals, homog1_check, homog1_residual,
    homogeneity_residuals, hs_components, hs_connection,
    hs_definition_residuals, liouville_section, nabla_S_U_residuals,
    prop76_check, spray_condition, spray_condition_residuals, spray_section,
    theorem7_closure_residuals, v_derivative,
)

from helpers import rng_for, random_poly_expr, sample_points
from test_connection import nontrivial_algebroid


QUAD = [[[0.5, 0.1], [0.1, -0.3]], [[0.2, 0.0], [0.0, 0.4]]]  # Ghat[a][b][c], sym in (b,c)


def quadratic_G(m=2, r=2, ghat=QUAD):
    out = []
    for a in range(r):
        acc = ZERO
        for b in range(r):
            for c in range(r):
                acc = acc + const(0.5 * ghat[a][b][c]) * yvar(b + 1) * yvar(c + 1)
        out.append(acc)
    return tuple(out)


def identity_system(G=None, F=None, m=2, r=2):
    rho = [[const(1.0) if i == a else ZERO for a in range(r)] for i in range(m)]
    alg = GenAlgebroid(m, r, rho, {})
    G = G if G is not None else quadratic_G(m, r)
    F = F if F is not None else (ZERO,) * r
    return MechSystem(alg, identity_morphism(r), F, G)


def triangular_g_system(seed="tri-g"):
    """Identity algebroid with a nonconstant triangular fiber morphism whose
    inverse is exact: g = [[1, x1/2], [0, 1]]."""
    m = r = 2
    rho = [[const(1.0) if i == a else ZERO for a in range(r)] for i in range(m)]
    alg = GenAlgebroid(m, r, rho, {})
    g = ((const(1.0), parse("x1/2", m, 0)), (ZERO, const(1.0)))
    gtil = ((const(1.0), parse("0-x1/2", m, 0)), (ZERO, const(1.0)))
    return MechSystem(alg, GhMorphism(g, gtil), (ZERO,) * r, quadratic_G(m, r))


def nontrivial_system():
    """Mechanical system over the nontrivial generalized algebroid with a
    quadratic spray and non-identity triangular morphism."""
    alg = nontrivial_algebroid()
    r = alg.r
    g = ((const(1.0), xvar(1), ZERO),
         (ZERO, const(1.0), ZERO),
         (ZERO, ZERO, const(1.0)))
    gtil = ((const(1.0), parse("0-x1", 1, 0), ZERO),
            (ZERO, const(1.0), ZERO),
            (ZERO, ZERO, const(1.0)))
    ghat = [[[0.3, 0.1, 0.0], [0.1, 0.0, 0.2], [0.0, 0.2, -0.1]],
            [[0.0, 0.4, 0.0], [0.4, 0.1, 0.0], [0.0, 0.0, 0.2]],
            [[0.1, 0.0, 0.0], [0.0, -0.2, 0.1], [0.0, 0.1, 0.0]]]
    return MechSystem(alg, GhMorphism(g, gtil), (ZERO,) * r, quadratic_G(1, r, ghat))


def test_canonical_connection_classical_quadratic():
    # identity morphisms, L = 0: Gamma^a_c = Ghat^a_{cb} y^b
    sys = identity_system()
    conn = canonical_connection(sys)
    for p in sample_points(2, 2, 25, seed=3):
        for a in range(2):
            for c in range(2):
                want = sum(QUAD[a][c][b] * p.y[b] for b in range(2))
                got = evaluate(conn.gamma[a][c], p.x, p.y)
                assert abs(got - want) < 1e-12


def test_canonical_connection_trivial():
    sys = identity_system(G=(ZERO, ZERO))
    conn = canonical_connection(sys)
    assert all(conn.gamma[a][c] == ZERO for a in range(2) for c in range(2))


def test_theorem7_closure():
    for sys in (identity_system(), triangular_g_system(), nontrivial_system()):
        conn = canonical_connection(sys)
        fields = theorem7_closure_residuals(sys, conn)
        for p in sample_points(sys.m, sys.r, 30, seed=5):
            for e in fields:
                assert abs(evaluate(e, p.x, p.y)) < 1e-9


def test_spray_condition_quadratic_exact():
    sys = identity_system()
    res = spray_condition(sys, sample_points(2, 2, 50, seed=7), 1e-12)
    assert res.status == "pass"
    assert res.max_residual < 1e-12


def test_spray_condition_cubic_fails():
    G = (parse("y1^3", 1, 1),)
    rho = [[const(1.0)]]
    alg = GenAlgebroid(1, 1, rho, {})
    sys = MechSystem(alg, identity_morphism(1), (ZERO,), G)
    fields = spray_condition_residuals(sys)
    assert abs(evaluate(fields[0], (0.0,), (1.0,)) - 1.0) < 1e-15  # y1^3 at y1=1
    res = spray_condition(sys, sample_points(1, 1, 20, seed=9), 1e-9)
    assert res.status == "fail"


def test_deviation_section_matches_spray_condition():
    # [C, S] - S = 2 (2 Gq - U d' Gq) vertical; vanishes iff (IM) does
    for sys in (identity_system(), triangular_g_system()):
        conn = canonical_connection(sys)
        dev = deviation_section(sys, conn)
        im = spray_condition_residuals(sys)
        for p in sample_points(2, 2, 20, seed=11):
            h, v = dev.eval(p)
            assert all(abs(u) < 1e-10 for u in h)
            for a in range(2):
                want = -2.0 * evaluate(im[a], p.x, p.y)
                assert abs(v[a] - want) < 1e-9


def test_spray_section_flags():
    sys = identity_system()
    s = spray_section(sys, sample_points(2, 2, 10, seed=13), tol=1e-9)
    assert s.is_spray
    bad = identity_system(G=(parse("y1^3", 2, 2), ZERO))
    s2 = spray_section(bad, sample_points(2, 2, 10, seed=13), tol=1e-9)
    assert not s2.is_spray


def test_spray_section_rejects_bad_morphism_inverse():
    # the Liouville pairing J(S) = C encodes gtil g = id; a wrong inverse
    # is caught at construction
    m = r = 2
    rho = [[const(1.0) if i == a else ZERO for a in range(r)] for i in range(m)]
    alg = GenAlgebroid(m, r, rho, {})
    g = ((const(1.0), xvar(1)), (ZERO, const(1.0)))
    wrong_gtil = ((const(1.0), ZERO), (ZERO, const(1.0)))  # not the inverse
    sys = MechSystem(alg, GhMorphism(g, wrong_gtil), (ZERO,) * r, quadratic_G())
    with pytest.raises(ValueError, match="Liouville"):
        spray_section(sys, sample_points(m, r, 10, seed=67, y_min=0.3), tol=1e-9)


def test_hs_classical_reduction():
    # identity morphisms, L=0, quadratic G, F=0: H^b_a = -d'_a G^b
    sys = identity_system()
    H = hs_components(sys)
    for p in sample_points(2, 2, 20, seed=17):
        for b in range(2):
            for a in range(2):
                want = -evaluate(sys.G[b].diff(yvar(a + 1)), p.x, p.y)
                assert abs(evaluate(H[b][a], p.x, p.y) - want) < 1e-12


def test_hs_definitional_bracket_oracle():
    for sys in (identity_system(), triangular_g_system(), nontrivial_system()):
        fields = hs_definition_residuals(sys)
        for p in sample_points(sys.m, sys.r, 25, seed=19):
            for e in fields:
                assert abs(evaluate(e, p.x, p.y)) < 1e-8, str(sys)


def test_hs_idempotent():
    sys = triangular_g_system()
    H = hs_components(sys)
    from algebroid_engine.mech import apply_HS_natural
    rng = rng_for("hs-idem")
    hc = [random_poly_expr(rng, 2, 2) for _ in range(2)]
    vt = [random_poly_expr(rng, 2, 2) for _ in range(2)]
    h1, v1 = apply_HS_natural(H, hc, vt)
    h2, v2 = apply_HS_natural(H, h1, v1)
    for p in sample_points(2, 2, 15, seed=23):
        for u, v in zip(h1 + v1, h2 + v2):
            a, b = evaluate(u, p.x, p.y), evaluate(v, p.x, p.y)
            assert abs(a - b) < 1e-12 * (1 + abs(a))


def test_canonical_vs_projector_connection_identity_g():
    # with constant g the two connection routes agree
    sys = identity_system()
    c1 = canonical_connection(sys)
    c2 = hs_connection(sys)
    for p in sample_points(2, 2, 20, seed=29):
        for a in range(2):
            for c in range(2):
                u = evaluate(c1.gamma[a][c], p.x, p.y)
                v = evaluate(c2.gamma[a][c], p.x, p.y)
                assert abs(u - v) < 1e-12


def test_nabla_S_U_zero_for_spray():
    for sys in (identity_system(), triangular_g_system(), nontrivial_system()):
        fields = nabla_S_U_residuals(sys)
        for p in sample_points(sys.m, sys.r, 30, seed=31):
            for e in fields:
                assert abs(evaluate(e, p.x, p.y)) < 1e-8


def test_homogeneity_of_projector_connection():
    for sys in (identity_system(), triangular_g_system(), nontrivial_system()):
        fields = homogeneity_residuals(sys)
        for p in sample_points(sys.m, sys.r, 30, seed=37):
            for e in fields:
                assert abs(evaluate(e, p.x, p.y)) < 1e-8


def test_v_derivative_and_hessian_basics():
    r = 2
    f = yvar(1)
    res = homog1_residual(r, f)
    assert all(evaluate(res, (0, 0), y) == 0.0 for y in ((1.0, 2.0), (-0.5, 3.0)))
    H = hessian(r, f)
    assert all(H.comps[a, b] == ZERO for a in range(r) for b in range(r))
    g = parse("y1^2", 2, 2)
    res = homog1_residual(r, g)
    assert evaluate(res, (0.0, 0.0), (1.0, 0.0)) == 1.0  # y1^2 fails degree 1
    X = TangentSection((ZERO, ZERO), (yvar(1), yvar(2)))
    assert evaluate(v_derivative(X, g), (0, 0), (3.0, 0.0)) == 18.0  # 2 y1 * y1


def test_homog1_check_reports():
    samples = sample_points(2, 2, 30, seed=41, y_min=0.1)
    ok = homog1_check(2, parse("y1+y2", 2, 2), samples, 1e-9)
    assert ok.status == "pass"
    bad = homog1_check(2, parse("y1^2", 2, 2), samples, 1e-9)
    assert bad.status == "fail"


def test_hessian_lemma_linear_and_sqrt():
    # nabla^v_U(Hess f) = -Hess f for 1-homogeneous f
    samples = sample_points(2, 2, 40, seed=43, y_min=0.2)
    for text in ("y1+y2", "2*y1-y2", "sqrt(y1^2+y2^2)"):
        f = parse(text, 2, 2)
        fields = hessian_lemma_residuals(2, f)
        for p in samples:
            for e in fields:
                assert abs(evaluate(e, p.x, p.y)) < 1e-9, text


def test_prop76():
    rng = rng_for("prop76")
    for sys in (identity_system(), nontrivial_system()):
        probes = [
            TangentSection(
                tuple(random_poly_expr(rng, sys.m, sys.r) for _ in range(sys.r)),
                tuple(random_poly_expr(rng, sys.m, sys.r) for _ in range(sys.r)))
            for _ in range(3)
        ]
        results = prop76_check(sys, probes,
                               sample_points(sys.m, sys.r, 25, seed=47), 1e-8)
        assert all(res.status == "pass" for res in results), sys


def test_prop76_cubic_not_spray():
    sys = identity_system(G=(parse("y1^3", 2, 2), ZERO))
    rng = rng_for("prop76-bad")
    probes = [TangentSection(
        tuple(random_poly_expr(rng, 2, 2) for _ in range(2)),
        tuple(random_poly_expr(rng, 2, 2) for _ in range(2)))]
    results = prop76_check(sys, probes, sample_points(2, 2, 20, seed=53), 1e-8)
    assert all(res.status == "inconclusive" for res in results)
    # the mixed curvature genuinely fails to kill U here
    conn = hs_connection(sys)
    from algebroid_engine.dconn import berwald_dconnection, mixed_curvature
    dc = berwald_dconnection(conn)
    U = canonical_U(2)
    out = mixed_curvature(dc, probes[0], probes[0], U)
    worst = max(max(abs(v) for v in out.eval(p)[0] + out.eval(p)[1])
                for p in sample_points(2, 2, 20, seed=59))
    assert worst > 1e-4


def test_liouville_is_vertical_projection_of_U():
    U = canonical_U(3)
    C = liouville_section(3)
    from algebroid_engine.connection import apply_V
    VU = apply_V(U)
    assert VU.hcoeff == C.hcoeff and VU.vcoeff == C.vcoeff


def test_canonical_U_derivatives_are_structural():
    # base derivatives of U^b vanish and fiber derivatives are the identity,
    # directly at the expression level
    from algebroid_engine.expr import ONE, x_deriv, y_deriv
    U = canonical_U(2)
    for b in range(2):
        for i in range(2):
            assert x_deriv(U.vcoeff[b], i) == ZERO
        for a in range(2):
            want = ONE if a == b else ZERO
            assert y_deriv(U.vcoeff[b], a) == want


def test_prop76_flat_zero():
    sys = identity_system(G=(ZERO, ZERO))
    rng = rng_for("prop76-flat")
    probes = [TangentSection(
        tuple(random_poly_expr(rng, 2, 2) for _ in range(2)),
        tuple(random_poly_expr(rng, 2, 2) for _ in range(2)))]
    results = prop76_check(sys, probes, sample_points(2, 2, 10, seed=61), 1e-12)
    assert all(res.status == "pass" and res.max_residual == 0.0 for res in results)

"""Mechanical systems, semisprays/sprays and the spray-induced calculus.

A mechanical system couples the algebroid with an external force F^a and
spray coefficients G^a; the working combination throughout is
Gq^a = G^a - F^a/4.  The canonical semispray is

    S = (g^a_b o h o pi) U^b base_a - 2 Gq^a vertical_a,

with U^a the fiber coordinate field y^a (so dU^b/dx^i = 0 and
d'U^b/dy^a = delta), and S is a spray iff U d'(Gq) = 2 Gq.

Two nonlinear connections are derivable from the same data: the canonical
connection of the mechanical system, and the projector connection
Gamma = -H_S obtained from the horizontal projector

    H_S(X) = (X + [J X, S] - J [X, S]) / 2.

They are implemented independently; for non-constant fiber morphisms their
closed-form components disagree in one term's sign, and the projector
route (validated against its bracket definition) drives all spray-side
checks.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebroid import GenAlgebroid, GhMorphism
from .connection import (
    NlConnection, TangentSection, apply_J, apply_V, section_bracket,
)
from .dconn import (
    DConnection, TensorField, TensorSig, berwald_dconnection, mixed_curvature,
)
from .expr import (
    Expr, FiberPoint, ZERO, const, evaluate, mul, neg, x_deriv, y_deriv, yvar,
)
from .report import CheckResult, worst_over_points

__all__ = [
    "MechSystem", "SpraySection",
    "canonical_connection", "spray_condition", "spray_section",
    "hs_components", "hs_connection", "apply_HS",
    "berwald_nabla", "liouville_section", "canonical_U",
    "v_derivative", "hessian", "homog1_check",
    "nabla_S_U_residuals", "homogeneity_residuals", "prop76_check",
]


@dataclass
class MechSystem:
    """Algebroid + fiber morphism + external force + spray coefficients."""

    alg: GenAlgebroid
    gh: GhMorphism
    F: tuple
    G: tuple

    def __post_init__(self):
        r = self.alg.r
        if len(self.F) != r or len(self.G) != r or self.gh.rank != r:
            raise ValueError("force/spray/morphism rank mismatch")

    @property
    def m(self) -> int:
        return self.alg.m

    @property
    def r(self) -> int:
        return self.alg.r

    def Gq(self, a: int) -> Expr:
        """G^a - F^a / 4, the combination every formula consumes."""
        return self.G[a] - mul(const(0.25), self.F[a])

    def g_h(self, a: int, b: int) -> Expr:
        return self.alg.h.compose(self.gh.g[a][b])

    def gtil_h(self, b: int, a: int) -> Expr:
        return self.alg.h.compose(self.gh.gtil[b][a])


@dataclass(frozen=True)
class SpraySection:
    """Canonical (semi)spray in natural components, with its spray flag."""

    hcoeff: tuple              # (g^a_b o h o pi) y^b
    vcoeff_natural: tuple      # -2 Gq^a
    is_spray: bool


def liouville_section(r: int) -> TangentSection:
    """C = y^a vertical_a (purely vertical, same in every adapted frame)."""
    return TangentSection((ZERO,) * r, tuple(yvar(a + 1) for a in range(r)))


def canonical_U(r: int) -> TangentSection:
    """The canonical section with both adapted component families y^a;
    its vertical projection is the Liouville section."""
    u = tuple(yvar(a + 1) for a in range(r))
    return TangentSection(u, u)


def spray_section(sys: MechSystem, samples: list[FiberPoint] | None = None,
                  tol: float = 1e-9) -> SpraySection:
    """Assemble the canonical semispray; the almost tangent structure must
    send it to the Liouville section, which is spot-checked pointwise when
    samples are given (it encodes gtil g = id)."""
    r = sys.r
    hc = tuple(sum((mul(sys.g_h(a, b), yvar(b + 1)) for b in range(r)), start=ZERO)
               for a in range(r))
    vc = tuple(mul(const(-2.0), sys.Gq(a)) for a in range(r))
    if samples:
        for p in samples:
            for b in range(r):
                got = sum(evaluate(sys.gtil_h(b, a), p.x, p.y)
                          * evaluate(hc[a], p.x, p.y) for a in range(r))
                if abs(got - p.y[b]) > tol:
                    raise ValueError(
                        "J(S) != Liouville section: morphism inverse residual "
                        f"{abs(got - p.y[b]):.3e} at {p}")
    res = spray_condition_residuals(sys)
    is_spray = True
    if samples:
        is_spray = all(abs(evaluate(e, p.x, p.y)) < tol for e in res for p in samples)
    return SpraySection(hc, vc, is_spray)


# ---------------------------------------------------------------------------
# the canonical nonlinear connection (mechanical-system example)
# ---------------------------------------------------------------------------

def canonical_connection(sys: MechSystem) -> NlConnection:
    """Connection coefficients of the canonical semispray:

        Gamma^a_c = (gtil^b_c) d'_b Gq^a
                  - (g^d_e U^e) (L^f_{dc}) (gtil^a_f) / 2
                  + (rho^j_c) d_j(g^b_e) U^e (gtil^a_b) / 2
                  - (g^b_e U^e) (rho^i_b) d_i(gtil^a_c) / 2

    (all morphism and anchor factors composed with h o pi; U^e = y^e).
    """
    m, r = sys.m, sys.r
    alg = sys.alg
    half = const(0.5)
    gamma = [[ZERO] * r for _ in range(r)]
    for a in range(r):
        for c in range(r):
            acc: Expr = ZERO
            for b in range(r):
                acc = acc + mul(sys.gtil_h(b, c), y_deriv(sys.Gq(a), b))
            for d in range(r):
                for e in range(r):
                    for f in range(r):
                        acc = acc - mul(half, mul(
                            mul(sys.g_h(d, e), yvar(e + 1)),
                            mul(alg.L_h(f, d, c), sys.gtil_h(a, f))))
            for j in range(m):
                for b in range(r):
                    for e in range(r):
                        acc = acc + mul(half, mul(
                            mul(alg.rho_h(j, c), x_deriv(sys.g_h(b, e), j)),
                            mul(yvar(e + 1), sys.gtil_h(a, b))))
            for b in range(r):
                for e in range(r):
                    for i in range(m):
                        acc = acc - mul(half, mul(
                            mul(sys.g_h(b, e), yvar(e + 1)),
                            mul(alg.rho_h(i, b), x_deriv(sys.gtil_h(a, c), i))))
            gamma[a][c] = acc
    return NlConnection(alg, gamma, gh=sys.gh)


def theorem7_closure_residuals(sys: MechSystem, conn: NlConnection) -> list:
    """Substitute the canonical connection back into the spray identity:
    2 Gq^a equals the four-term contraction of Gamma with g U (plus the
    L / dg / dgtil corrections); exact for sprays."""
    m, r = sys.m, sys.r
    alg = sys.alg
    half = const(0.5)
    out = []
    for a in range(r):
        acc: Expr = ZERO
        for c in range(r):
            gc = sum((mul(sys.g_h(c, f), yvar(f + 1)) for f in range(r)), start=ZERO)
            acc = acc + mul(conn.gamma[a][c], gc)
            for d in range(r):
                for e in range(r):
                    for b in range(r):
                        acc = acc + mul(half, mul(
                            mul(sys.g_h(d, e), yvar(e + 1)),
                            mul(alg.L_h(b, d, c), mul(sys.gtil_h(a, b), gc))))
            for j in range(m):
                for b in range(r):
                    for e in range(r):
                        acc = acc - mul(half, mul(
                            mul(alg.rho_h(j, c), x_deriv(sys.g_h(b, e), j)),
                            mul(yvar(e + 1), mul(sys.gtil_h(a, b), gc))))
            for b in range(r):
                for e in range(r):
                    for i in range(m):
                        acc = acc + mul(half, mul(
                            mul(sys.g_h(b, e), yvar(e + 1)),
                            mul(alg.rho_h(i, b), mul(x_deriv(sys.gtil_h(a, c), i), gc))))
        out.append(acc - mul(const(2.0), sys.Gq(a)))
    return out


# ---------------------------------------------------------------------------
# spray condition
# ---------------------------------------------------------------------------

def spray_condition_residuals(sys: MechSystem) -> list:
    """U^b d'_b Gq^a - 2 Gq^a (Euler 2-homogeneity defect)."""
    r = sys.r
    out = []
    for a in range(r):
        acc: Expr = ZERO
        for b in range(r):
            acc = acc + mul(yvar(b + 1), y_deriv(sys.Gq(a), b))
        out.append(acc - mul(const(2.0), sys.Gq(a)))
    return out


def spray_condition(sys: MechSystem, samples: list[FiberPoint],
                    tol: float) -> CheckResult:
    fields = spray_condition_residuals(sys)

    def residual(p: FiberPoint) -> float:
        return max(abs(evaluate(e, p.x, p.y)) for e in fields)

    return worst_over_points("spray condition (IM)", residual, samples, tol,
                             anchor="2-homogeneity of G - F/4")


def deviation_section(sys: MechSystem, conn: NlConnection) -> TangentSection:
    """[C, S] - S, the defect whose vanishing characterizes sprays."""
    r = sys.r
    spray = spray_section(sys)
    C = liouville_section(r)
    S = conn.from_natural(spray.hcoeff, spray.vcoeff_natural)
    return section_bracket(conn, C, S) - S


# ---------------------------------------------------------------------------
# horizontal projector associated to the semispray
# ---------------------------------------------------------------------------

def hs_components(sys: MechSystem) -> list:
    """H^b_a of the spray horizontal projector:

        H^b_a = [ U^c ((g^d_c gtil^b_e L^e_{da}) o h o pi)
                - U^c (rho^i_a) d_i(g^e_c) gtil^b_e
                - (g^c_d U^d) (rho^i_c) d_i(gtil^b_a)
                - 2 (gtil^c_a) d'_c Gq^b ] / 2
    """
    m, r = sys.m, sys.r
    alg = sys.alg
    H = [[ZERO] * r for _ in range(r)]
    for b in range(r):
        for a in range(r):
            acc: Expr = ZERO
            for c in range(r):
                for d in range(r):
                    for e in range(r):
                        acc = acc + mul(yvar(c + 1), mul(
                            sys.g_h(d, c), mul(sys.gtil_h(b, e), alg.L_h(e, d, a))))
            for c in range(r):
                for i in range(m):
                    for e in range(r):
                        acc = acc - mul(yvar(c + 1), mul(
                            alg.rho_h(i, a),
                            mul(x_deriv(sys.g_h(e, c), i), sys.gtil_h(b, e))))
            for c in range(r):
                for d in range(r):
                    for i in range(m):
                        acc = acc - mul(mul(sys.g_h(c, d), yvar(d + 1)),
                                        mul(alg.rho_h(i, c),
                                            x_deriv(sys.gtil_h(b, a), i)))
            for c in range(r):
                acc = acc - mul(const(2.0), mul(sys.gtil_h(c, a),
                                                y_deriv(sys.Gq(b), c)))
            H[b][a] = mul(const(0.5), acc)
    return H


def hs_connection(sys: MechSystem) -> NlConnection:
    """Nonlinear connection induced by the projector: Gamma^b_a = -H^b_a
    (the adapted frame then reads delta_a = base_a + H^b_a vertical_b)."""
    H = hs_components(sys)
    r = sys.r
    gamma = [[neg(H[b][a]) for a in range(r)] for b in range(r)]
    return NlConnection(sys.alg, gamma, gh=sys.gh)


def apply_HS_natural(H: list, hc, vtil) -> tuple:
    """Projector action on natural components:
    (X, Xtil) -> (X, X^a H^b_a)."""
    r = len(H)
    out_v = []
    for b in range(r):
        acc: Expr = ZERO
        for a in range(r):
            acc = acc + mul(H[b][a], hc[a])
        out_v.append(acc)
    return tuple(hc), tuple(out_v)


def apply_HS(sys: MechSystem, hc, vtil) -> tuple:
    return apply_HS_natural(hs_components(sys), hc, vtil)


def hs_definition_residuals(sys: MechSystem, conn: NlConnection | None = None) -> list:
    """Defining-bracket oracle: H_S(X) - (X + [J X, S] - J[X, S]) / 2 on the
    natural base-frame probes; the component formula must reproduce it."""
    r = sys.r
    conn = conn or hs_connection(sys)
    spray = spray_section(sys)
    S = conn.from_natural(spray.hcoeff, spray.vcoeff_natural)
    H = hs_components(sys)
    fields = []
    for a in range(r):
        X = conn.from_natural([const(1.0) if b == a else ZERO for b in range(r)],
                              [ZERO] * r)
        JX = apply_J(conn, X)
        br1 = section_bracket(conn, JX, S)
        br2 = apply_J(conn, section_bracket(conn, X, S))
        half = const(0.5)
        defn = TangentSection(
            tuple(mul(half, X.hcoeff[b] + br1.hcoeff[b] - br2.hcoeff[b])
                  for b in range(r)),
            tuple(mul(half, X.vcoeff[b] + br1.vcoeff[b] - br2.vcoeff[b])
                  for b in range(r)))
        # component form of H_S(base_a) in the same adapted frame
        comp_h, comp_v = apply_HS_natural(
            H, [const(1.0) if b == a else ZERO for b in range(r)], None)
        comp = conn.from_natural(comp_h, comp_v)
        fields.extend(defn.hcoeff[b] - comp.hcoeff[b] for b in range(r))
        fields.extend(defn.vcoeff[b] - comp.vcoeff[b] for b in range(r))
        # vertical probes must be annihilated
        V = conn.frame_vertical(a)
        JV = apply_J(conn, V)
        brv = section_bracket(conn, JV, S)
        brv2 = apply_J(conn, section_bracket(conn, V, S))
        fields.extend(mul(half, V.hcoeff[b] + brv.hcoeff[b] - brv2.hcoeff[b])
                      for b in range(r))
        fields.extend(mul(half, V.vcoeff[b] + brv.vcoeff[b] - brv2.vcoeff[b])
                      for b in range(r))
    return fields


# ---------------------------------------------------------------------------
# Berwald derivative and vertical calculus
# ---------------------------------------------------------------------------

def berwald_nabla(conn: NlConnection) -> DConnection:
    """Berwald covariant derivative of a nonlinear connection (typically the
    spray projector connection): (d'Gamma, d'Gamma, 0, 0) with the plain
    fiber derivative as the vertical rule."""
    return berwald_dconnection(conn)


def v_derivative(X: TangentSection, f: Expr) -> Expr:
    """v-covariant derivative of a function: (V X)^a d'_a f."""
    out: Expr = ZERO
    for a, xa in enumerate(X.vcoeff):
        out = out + mul(xa, y_deriv(f, a))
    return out


def v_derivative_tensor(X: TangentSection, T: TensorField) -> TensorField:
    """v-covariant derivative of a tensor in the Berwald vertical calculus:
    componentwise (V X)^c d'_c T (no corrections, V = Vtil = 0)."""
    out = T.copy_empty()
    for c in range(T.rank):
        if X.vcoeff[c] == ZERO:
            continue
        out = out + T.map(lambda e, c=c: y_deriv(e, c)).scale(X.vcoeff[c])
    return out


def hessian(r: int, f: Expr) -> TensorField:
    """Hess(f) = (d'_a d'_b f) dy^a (x) dy^b as a (0,0;0,2) tensor."""
    T = TensorField(TensorSig(0, 0, 0, 2), r)
    for a in range(r):
        da = y_deriv(f, a)
        for b in range(r):
            T.comps[a, b] = y_deriv(da, b)
    return T


def homog1_residual(r: int, f: Expr) -> Expr:
    """U^a d'_a f - f (zero iff f is 1-homogeneous in the fiber)."""
    acc: Expr = ZERO
    for a in range(r):
        acc = acc + mul(yvar(a + 1), y_deriv(f, a))
    return acc - f


def homog1_check(r: int, f: Expr, samples: list[FiberPoint],
                 tol: float) -> CheckResult:
    res = homog1_residual(r, f)
    return worst_over_points("1-homogeneity (esi)",
                             lambda p: abs(evaluate(res, p.x, p.y)),
                             samples, tol, anchor="U d'f = f")


def hessian_lemma_residuals(r: int, f: Expr) -> list:
    """nabla^v_U(Hess f) + Hess f, which vanishes for 1-homogeneous f."""
    U = canonical_U(r)
    H = hessian(r, f)
    D = v_derivative_tensor(U, H)
    out = []
    for a in range(r):
        for b in range(r):
            out.append(D.comps[a, b] + H.comps[a, b])
    return out


# ---------------------------------------------------------------------------
# spray-side lemma suites
# ---------------------------------------------------------------------------

def nabla_S_U_residuals(sys: MechSystem) -> list:
    """Components of nabla_S U for the Berwald derivative of the spray
    projector connection; zero when S is a spray."""
    conn = hs_connection(sys)
    dc = berwald_dconnection(conn)
    spray = spray_section(sys)
    S = conn.from_natural(spray.hcoeff, spray.vcoeff_natural)
    U = canonical_U(sys.r)
    from .dconn import cov_deriv_section
    out = cov_deriv_section(dc, S, U)
    return list(out.hcoeff) + list(out.vcoeff)


def homogeneity_residuals(sys: MechSystem) -> list:
    """U^c d'_c Gamma^b_a - Gamma^b_a for the projector connection; zero for
    sprays (the projector is then homogeneous)."""
    conn = hs_connection(sys)
    r = sys.r
    out = []
    for b in range(r):
        for a in range(r):
            acc: Expr = ZERO
            for c in range(r):
                acc = acc + mul(yvar(c + 1), y_deriv(conn.gamma[b][a], c))
            out.append(acc - conn.gamma[b][a])
    return out


def prop76_check(sys: MechSystem, probes: list[TangentSection],
                 samples: list[FiberPoint], tol: float) -> list[CheckResult]:
    """Mixed curvature of the spray Berwald derivative annihilates the
    canonical section in either slot: P(X,Y)U = 0 and P(U,X)Y = 0.

    Requires the spray condition; when it fails the report rows are marked
    inconclusive."""
    conn = hs_connection(sys)
    dc = berwald_dconnection(conn)
    U = canonical_U(sys.r)
    spray_ok = spray_condition(sys, samples, tol)
    fields_a: list[Expr] = []
    fields_b: list[Expr] = []
    for i, X in enumerate(probes):
        Y = probes[(i + 1) % len(probes)]
        outU = mixed_curvature(dc, X, Y, U)
        outU2 = mixed_curvature(dc, U, X, Y)
        fields_a.extend(list(outU.hcoeff) + list(outU.vcoeff))
        fields_b.extend(list(outU2.hcoeff) + list(outU2.vcoeff))

    def mk(name, fields):
        def fn(p: FiberPoint) -> float:
            return max(abs(evaluate(e, p.x, p.y)) for e in fields)
        res = worst_over_points(name, fn, samples, tol, anchor="homogeneous projector mixed curvature")
        if spray_ok.status != "pass":
            res.status = "inconclusive"
        return res

    return [mk("mixed curvature kills U (right)", fields_a),
            mk("mixed curvature kills U (left)", fields_b)]

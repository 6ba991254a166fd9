"""Nonlinear connections, adapted frames and the projector algebra.

A nonlinear connection splits the generalized tangent bundle; its
coefficients Gamma^a_c generate the adapted frame

    delta_a = base-frame_a - Gamma^b_a vertical_b,

realized on functions as the first-order operator

    D_a = (rho^i_a o h o pi) d/dx^i - Gamma^b_a d/dy^b.

Sections are stored in the adapted frame; every later formula is written
there.  The adapted coframe is determined by the same coefficients
(delta y^a = Gamma^a_c dx^c + dy^a) and is not materialized further.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebroid import GenAlgebroid, GhMorphism
from .expr import Expr, FiberPoint, ONE, ZERO, evaluate, mul, neg, x_deriv, y_deriv
from .report import CheckResult, max_abs_fields, worst_over_points

__all__ = [
    "NlConnection", "TangentSection",
    "apply_V", "apply_H", "apply_P", "apply_J",
    "frame_bracket_check", "section_bracket",
]


@dataclass(frozen=True)
class TangentSection:
    """Section of the generalized tangent bundle in an adapted frame:
    X = hcoeff^a delta_a + vcoeff^a vertical_a."""

    hcoeff: tuple
    vcoeff: tuple

    @property
    def rank(self) -> int:
        return len(self.hcoeff)

    def __add__(self, other: "TangentSection") -> "TangentSection":
        return TangentSection(tuple(a + b for a, b in zip(self.hcoeff, other.hcoeff)),
                              tuple(a + b for a, b in zip(self.vcoeff, other.vcoeff)))

    def __sub__(self, other: "TangentSection") -> "TangentSection":
        return TangentSection(tuple(a - b for a, b in zip(self.hcoeff, other.hcoeff)),
                              tuple(a - b for a, b in zip(self.vcoeff, other.vcoeff)))

    def scale(self, f: Expr) -> "TangentSection":
        return TangentSection(tuple(mul(f, e) for e in self.hcoeff),
                              tuple(mul(f, e) for e in self.vcoeff))

    def eval(self, p: FiberPoint) -> tuple:
        return (tuple(evaluate(e, p.x, p.y) for e in self.hcoeff),
                tuple(evaluate(e, p.x, p.y) for e in self.vcoeff))


class NlConnection:
    """Nonlinear connection coefficients Gamma^a_c(x, y) over an algebroid,
    optionally carrying the fiber morphism used by lifts and sprays."""

    def __init__(self, alg: GenAlgebroid, gamma, gh: GhMorphism | None = None):
        self.alg = alg
        r = alg.r
        self.gamma = [[gamma[a][c] for c in range(r)] for a in range(r)]
        self.gh = gh

    @property
    def r(self) -> int:
        return self.alg.r

    @property
    def m(self) -> int:
        return self.alg.m

    # -- adapted frame as operators on functions ---------------------------

    def delta_action(self, a: int, f: Expr) -> Expr:
        """Action of delta_a on a function:
        (rho^i_a o h o pi) d_i f - Gamma^b_a d'_b f."""
        out: Expr = ZERO
        for i in range(self.m):
            out = out + mul(self.alg.rho_h(i, a), x_deriv(f, i))
        for b in range(self.r):
            out = out - mul(self.gamma[b][a], y_deriv(f, b))
        return out

    # -- curvature ----------------------------------------------------------

    def curvature_R(self) -> list:
        """R[c][a][b] = R^c_{ab}
        = delta_b(Gamma^c_a) - delta_a(Gamma^c_b) + (L^d_{ab} o h o pi) Gamma^c_d."""
        r = self.r
        R = [[[ZERO] * r for _ in range(r)] for _ in range(r)]
        for c in range(r):
            for a in range(r):
                for b in range(a + 1, r):
                    val = (self.delta_action(b, self.gamma[c][a])
                           - self.delta_action(a, self.gamma[c][b]))
                    for d in range(r):
                        val = val + mul(self.alg.L_h(d, a, b), self.gamma[c][d])
                    R[c][a][b] = val
                    R[c][b][a] = neg(val)
        return R

    # -- frame conversions ---------------------------------------------------

    def from_natural(self, hcoeff, vtil) -> TangentSection:
        """Adapted components of X = hcoeff^a base_a + vtil^a vertical_a,
        using Xdot^a = Xtil^a + Gamma^a_b X^b."""
        r = self.r
        vc = []
        for a in range(r):
            acc = vtil[a]
            for b in range(r):
                acc = acc + mul(self.gamma[a][b], hcoeff[b])
            vc.append(acc)
        return TangentSection(tuple(hcoeff), tuple(vc))

    def to_natural(self, X: TangentSection) -> tuple:
        r = self.r
        vtil = []
        for a in range(r):
            acc = X.vcoeff[a]
            for b in range(r):
                acc = acc - mul(self.gamma[a][b], X.hcoeff[b])
            vtil.append(acc)
        return tuple(X.hcoeff), tuple(vtil)

    def frame_delta(self, a: int) -> TangentSection:
        r = self.r
        return TangentSection(tuple(ONE if b == a else ZERO for b in range(r)),
                              (ZERO,) * r)

    def frame_vertical(self, a: int) -> TangentSection:
        r = self.r
        return TangentSection((ZERO,) * r,
                              tuple(ONE if b == a else ZERO for b in range(r)))


# ---------------------------------------------------------------------------
# projectors and the almost tangent structure
# ---------------------------------------------------------------------------

def apply_V(X: TangentSection) -> TangentSection:
    """Vertical projector: (X, Xdot) -> (0, Xdot)."""
    return TangentSection((ZERO,) * X.rank, X.vcoeff)


def apply_H(X: TangentSection) -> TangentSection:
    """Horizontal projector: (X, Xdot) -> (X, 0)."""
    return TangentSection(X.hcoeff, (ZERO,) * X.rank)


def apply_P(X: TangentSection) -> TangentSection:
    """Almost product structure P = H - V: (X, Xdot) -> (X, -Xdot)."""
    return TangentSection(X.hcoeff, tuple(neg(e) for e in X.vcoeff))


def apply_J(conn: NlConnection, X: TangentSection) -> TangentSection:
    """Almost tangent structure of (g, h):
    (X, Xdot) -> (0, (gtil^b_a o h o pi) X^a)."""
    if conn.gh is None:
        raise ValueError("apply_J requires a fiber morphism (g, h)")
    r = X.rank
    comp = conn.alg.h.compose
    vc = []
    for b in range(r):
        acc: Expr = ZERO
        for a in range(r):
            acc = acc + mul(comp(conn.gh.gtil[b][a]), X.hcoeff[a])
        vc.append(acc)
    return TangentSection((ZERO,) * r, tuple(vc))


# ---------------------------------------------------------------------------
# the honest bracket of sections (prolongation bracket)
# ---------------------------------------------------------------------------

def _vector_action(conn: NlConnection, hc, vtil, f: Expr) -> Expr:
    """Action of the realized vector field of a section (natural components
    hc, vtil) on a function."""
    out: Expr = ZERO
    for a in range(conn.r):
        if hc[a] != ZERO:
            for i in range(conn.m):
                out = out + mul(mul(hc[a], conn.alg.rho_h(i, a)), x_deriv(f, i))
        if vtil[a] != ZERO:
            out = out + mul(vtil[a], y_deriv(f, a))
    return out


def section_bracket(conn: NlConnection, X: TangentSection,
                    Y: TangentSection) -> TangentSection:
    """Bracket of generalized-tangent-bundle sections, assembled from the
    pull-back bracket of the base parts and the commutator of the realized
    vector fields; returned in the adapted frame."""
    xh, xv = conn.to_natural(X)
    yh, yv = conn.to_natural(Y)
    r = conn.r
    W = []
    for c in range(r):
        acc: Expr = ZERO
        for a in range(r):
            for b in range(r):
                acc = acc + mul(mul(xh[a], yh[b]), conn.alg.L_h(c, a, b))
        acc = acc + _vector_action(conn, xh, xv, yh[c])
        acc = acc - _vector_action(conn, yh, yv, xh[c])
        W.append(acc)
    Z = []
    for c in range(r):
        acc = _vector_action(conn, xh, xv, yv[c])
        acc = acc - _vector_action(conn, yh, yv, xv[c])
        Z.append(acc)
    return conn.from_natural(W, Z)


# ---------------------------------------------------------------------------
# frame-bracket theorem check
# ---------------------------------------------------------------------------

class _FrameOp:
    """First-order operator sum ai[i] d/dx^i + av[c] d/dy^c; applying it to
    the coordinate probe functions x^j / y^c returns exactly ai[j] / av[c],
    which determines the operator and hence the commutator."""

    def __init__(self, ai, av):
        self.ai = list(ai)
        self.av = list(av)

    def apply(self, f: Expr) -> Expr:
        out: Expr = ZERO
        for i, c_i in enumerate(self.ai):
            out = out + mul(c_i, x_deriv(f, i))
        for a, c_a in enumerate(self.av):
            out = out + mul(c_a, y_deriv(f, a))
        return out

    def commutator(self, other: "_FrameOp") -> "_FrameOp":
        ai = [self.apply(b) - other.apply(a) for a, b in zip(self.ai, other.ai)]
        av = [self.apply(b) - other.apply(a) for a, b in zip(self.av, other.av)]
        return _FrameOp(ai, av)


def _delta_op(conn: NlConnection, a: int) -> _FrameOp:
    return _FrameOp([conn.alg.rho_h(i, a) for i in range(conn.m)],
                    [neg(conn.gamma[b][a]) for b in range(conn.r)])


def _vert_op(conn: NlConnection, a: int) -> _FrameOp:
    return _FrameOp([ZERO] * conn.m,
                    [ONE if b == a else ZERO for b in range(conn.r)])


def frame_bracket_check(conn: NlConnection, samples: list[FiberPoint],
                        tol: float) -> list[CheckResult]:
    """Residuals of the frame bracket relations

        [delta_a, delta_b]    = (L^c_{ab} o h o pi) delta_c + R^c_{ab} vert_c
        [delta_a, vert_b]     = (d'_b Gamma^c_a) vert_c
        [vert_a,  vert_b]     = 0

    with the left sides computed as commutators of the first-order frame
    operators on the coordinate probe functions x^i, y^a (which determines
    a first-order operator completely).
    """
    m, r = conn.m, conn.r
    R = conn.curvature_R()
    deltas = [_delta_op(conn, a) for a in range(r)]
    verts = [_vert_op(conn, a) for a in range(r)]

    hh_residuals: list[Expr] = []
    for a in range(r):
        for b in range(a + 1, r):
            comm = deltas[a].commutator(deltas[b])
            rhs = _FrameOp([ZERO] * m, [ZERO] * r)
            for c in range(r):
                lab = conn.alg.L_h(c, a, b)
                for i in range(m):
                    rhs.ai[i] = rhs.ai[i] + mul(lab, deltas[c].ai[i])
                for e in range(r):
                    rhs.av[e] = rhs.av[e] + mul(lab, deltas[c].av[e])
                rhs.av[c] = rhs.av[c] + R[c][a][b]
            hh_residuals.extend(u - v for u, v in zip(comm.ai, rhs.ai))
            hh_residuals.extend(u - v for u, v in zip(comm.av, rhs.av))

    hv_residuals: list[Expr] = []
    for a in range(r):
        for b in range(r):
            comm = deltas[a].commutator(verts[b])
            hv_residuals.extend(comm.ai)                       # expected 0
            for c in range(r):
                hv_residuals.append(comm.av[c] - y_deriv(conn.gamma[c][a], b))

    vv_residuals: list[Expr] = []
    for a in range(r):
        for b in range(a + 1, r):
            comm = verts[a].commutator(verts[b])
            vv_residuals.extend(comm.ai)
            vv_residuals.extend(comm.av)

    return [
        worst_over_points("frame bracket [delta,delta]", max_abs_fields(hh_residuals),
                          samples, tol, anchor="horizontal frame bracket"),
        worst_over_points("frame bracket [delta,vert]", max_abs_fields(hv_residuals),
                          samples, tol, anchor="mixed frame bracket"),
        worst_over_points("frame bracket [vert,vert]", max_abs_fields(vv_residuals),
                          samples, tol, anchor="vertical frame bracket"),
    ]


def curvature_vertical_part_residual(conn: NlConnection) -> list:
    """Expressions R^c_{ab} - (vertical adapted part of [delta_a, delta_b])
    where the bracket is computed by the honest section bracket; zero for
    arbitrary data, which pins the sign convention of curvature_R."""
    r = conn.r
    R = conn.curvature_R()
    out = []
    for a in range(r):
        for b in range(r):
            br = section_bracket(conn, conn.frame_delta(a), conn.frame_delta(b))
            for c in range(r):
                out.append(R[c][a][b] - br.vcoeff[c])
    return out

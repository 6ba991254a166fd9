"""Distinguished linear connections on the generalized tangent bundle.

A distinguished connection is the component quadruple (H, Htil, V, Vtil)
defined by

    D_{delta_c} delta_b = H^a_{bc} delta_a      D_{delta_c} vert_b = Htil^a_{bc} vert_a
    D_{vert_c}  delta_b = V^a_{bc} delta_a      D_{vert_c}  vert_b = Vtil^a_{bc} vert_a

together with the covariant component rules for arbitrary mixed tensors.
Torsion and curvature are exposed twice: as component tensors and as the
defining operators on sections; the identity suites compare the two at
sampled points.

Component formulas are derived from the operator definitions together
with the frame-bracket relations; the operator form is the source of truth
for every bracket-correction term, and the equivalence of the two routes
is part of the acceptance gate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .connection import NlConnection, TangentSection, section_bracket
from .expr import Expr, FiberPoint, ZERO, evaluate, mul, neg, y_deriv
from .report import CheckResult, max_abs_fields, worst_over_points

__all__ = [
    "TensorSig", "TensorField", "DConnection",
    "berwald_dconnection", "cov_deriv", "cov_deriv_section",
    "torsion_components", "curvature_components", "mixed_curvature",
    "torsion_operator", "curvature_operator",
    "ricci_check", "bianchi_check", "fr6_check",
]


@dataclass(frozen=True)
class TensorSig:
    """Tensor type (p horizontal-upper, q horizontal-lower, rv vertical-upper,
    s vertical-lower); component arrays are indexed in that slot order."""

    p: int
    q: int
    rv: int
    s: int

    @property
    def order(self) -> int:
        return self.p + self.q + self.rv + self.s

    def slot_kind(self, axis: int) -> str:
        if axis < self.p:
            return "hu"
        if axis < self.p + self.q:
            return "hl"
        if axis < self.p + self.q + self.rv:
            return "vu"
        return "vl"


class TensorField:
    """Dense tensor field with Expr components over a fixed connection rank."""

    def __init__(self, sig: TensorSig, rank: int, comps: np.ndarray | None = None):
        self.sig = sig
        self.rank = rank
        if comps is None:
            comps = np.full((rank,) * sig.order, ZERO, dtype=object)
        self.comps = comps

    @classmethod
    def scalar(cls, rank: int, value: Expr) -> "TensorField":
        t = cls(TensorSig(0, 0, 0, 0), rank)
        t.comps = np.array(value, dtype=object)
        return t

    def copy_empty(self, sig: TensorSig | None = None) -> "TensorField":
        return TensorField(sig or self.sig, self.rank)

    def map(self, f) -> "TensorField":
        out = self.copy_empty()
        if self.sig.order == 0:
            out.comps = np.array(f(self.comps[()]), dtype=object)
            return out
        for idx in np.ndindex(*self.comps.shape):
            out.comps[idx] = f(self.comps[idx])
        return out

    def __add__(self, other: "TensorField") -> "TensorField":
        if self.sig != other.sig:
            raise ValueError("tensor signature mismatch")
        out = self.copy_empty()
        if self.sig.order == 0:
            out.comps = np.array(self.comps[()] + other.comps[()], dtype=object)
            return out
        for idx in np.ndindex(*self.comps.shape):
            out.comps[idx] = self.comps[idx] + other.comps[idx]
        return out

    def __sub__(self, other: "TensorField") -> "TensorField":
        return self + other.map(neg)

    def scale(self, f: Expr) -> "TensorField":
        return self.map(lambda e: mul(f, e))

    def indices(self):
        return [()] if self.sig.order == 0 else list(np.ndindex(*self.comps.shape))

    def tensor_product(self, other: "TensorField") -> "TensorField":
        """Tensor product; the factor's index groups are appended after this
        tensor's groups, slot by slot."""
        sig = TensorSig(self.sig.p + other.sig.p, self.sig.q + other.sig.q,
                        self.sig.rv + other.sig.rv, self.sig.s + other.sig.s)
        out = TensorField(sig, self.rank)
        for i1 in self.indices():
            a1 = self.comps[i1]
            g1 = _split_groups(i1, self.sig)
            for i2 in other.indices():
                a2 = other.comps[i2]
                g2 = _split_groups(i2, other.sig)
                idx = g1[0] + g2[0] + g1[1] + g2[1] + g1[2] + g2[2] + g1[3] + g2[3]
                if sig.order == 0:
                    out.comps = np.array(mul(a1, a2), dtype=object)
                else:
                    out.comps[idx] = mul(a1, a2)
        return out

    def eval_max(self, p: FiberPoint) -> float:
        if self.sig.order == 0:
            return abs(evaluate(self.comps[()], p.x, p.y))
        return max(abs(evaluate(self.comps[idx], p.x, p.y))
                   for idx in np.ndindex(*self.comps.shape))


def _split_groups(idx: tuple, sig: TensorSig):
    p, q, rv, s = sig.p, sig.q, sig.rv, sig.s
    return (idx[:p], idx[p:p + q], idx[p + q:p + q + rv], idx[p + q + rv:])


@dataclass
class DConnection:
    """Distinguished linear connection components; H[a][b][c] = H^a_{bc}
    (a upper, b differentiated slot, c direction)."""

    conn: NlConnection
    H: list
    Htil: list
    V: list
    Vtil: list
    normal: bool = False

    def __post_init__(self):
        self._torsion_cache = None
        self._curvature_cache = None

    @property
    def rank(self) -> int:
        return self.conn.r


def berwald_dconnection(conn: NlConnection) -> DConnection:
    """Berwald connection of a nonlinear connection:
    (H, Htil, V, Vtil) = (d'Gamma, d'Gamma, 0, 0), normal by construction.

    The vertical covariant rule is then plain fiber differentiation, which
    is the vertical calculus the spray/Weyl layer builds on.
    """
    r = conn.r
    H = [[[y_deriv(conn.gamma[a][c], b) for c in range(r)] for b in range(r)]
         for a in range(r)]
    Z = [[[ZERO] * r for _ in range(r)] for _ in range(r)]
    return DConnection(conn, H, H, Z, Z, normal=True)


# ---------------------------------------------------------------------------
# covariant component rules
# ---------------------------------------------------------------------------

def _corrections(dc: DConnection, T: TensorField, c: int, upper_coeff, lower_coeff,
                 upper_coeff_v, lower_coeff_v) -> TensorField:
    """Shared correction-sum machinery for the |c and |_c rules."""
    out = T.copy_empty()
    r = dc.rank
    if T.sig.order == 0:
        return out
    for idx in np.ndindex(*T.comps.shape):
        acc: Expr = ZERO
        for axis in range(T.sig.order):
            kind = T.sig.slot_kind(axis)
            sign = 1 if kind in ("hu", "vu") else -1
            table = {"hu": upper_coeff, "hl": lower_coeff,
                     "vu": upper_coeff_v, "vl": lower_coeff_v}[kind]
            k = idx[axis]
            for e in range(r):
                swapped = idx[:axis] + (e,) + idx[axis + 1:]
                if kind in ("hu", "vu"):
                    coeff = table[k][e][c]     # H^{a_k}_{e c}
                else:
                    coeff = table[e][k][c]     # H^{e}_{b_k c}
                term = mul(coeff, T.comps[swapped])
                acc = acc + term if sign > 0 else acc - term
        out.comps[idx] = acc
    return out


def horizontal_deriv(dc: DConnection, T: TensorField, c: int) -> TensorField:
    """Component rule T..._{|c}: delta_c on components plus H/Htil sums."""
    base = T.map(lambda e: dc.conn.delta_action(c, e))
    return base + _corrections(dc, T, c, dc.H, dc.H, dc.Htil, dc.Htil)


def vertical_deriv(dc: DConnection, T: TensorField, c: int) -> TensorField:
    """Component rule T...|_c: fiber derivative plus V/Vtil sums."""
    base = T.map(lambda e: y_deriv(e, c))
    return base + _corrections(dc, T, c, dc.V, dc.V, dc.Vtil, dc.Vtil)


def horizontal_differential(dc: DConnection, T: TensorField) -> TensorField:
    """Full covariant differential appending one horizontal-lower index
    (placed last in the horizontal-lower group)."""
    sig = T.sig
    new_sig = TensorSig(sig.p, sig.q + 1, sig.rv, sig.s)
    out = TensorField(new_sig, T.rank)
    for c in range(T.rank):
        D = horizontal_deriv(dc, T, c)
        for idx in D.indices():
            g = _split_groups(idx, sig)
            out.comps[g[0] + g[1] + (c,) + g[2] + g[3]] = D.comps[idx]
    return out


def vertical_differential(dc: DConnection, T: TensorField) -> TensorField:
    """Full vertical differential appending one vertical-lower index."""
    sig = T.sig
    new_sig = TensorSig(sig.p, sig.q, sig.rv, sig.s + 1)
    out = TensorField(new_sig, T.rank)
    for c in range(T.rank):
        D = vertical_deriv(dc, T, c)
        for idx in D.indices():
            g = _split_groups(idx, sig)
            out.comps[g[0] + g[1] + g[2] + g[3] + (c,)] = D.comps[idx]
    return out


def cov_deriv(dc: DConnection, X: TangentSection, T: TensorField) -> TensorField:
    """Covariant derivative along a section: X^c T_{|c} + Xdot^c T|_c."""
    out = T.copy_empty()
    for c in range(dc.rank):
        if X.hcoeff[c] != ZERO:
            out = out + horizontal_deriv(dc, T, c).scale(X.hcoeff[c])
        if X.vcoeff[c] != ZERO:
            out = out + vertical_deriv(dc, T, c).scale(X.vcoeff[c])
    return out


def _section_as_tensors(rank: int, Y: TangentSection):
    th = TensorField(TensorSig(1, 0, 0, 0), rank)
    tv = TensorField(TensorSig(0, 0, 1, 0), rank)
    for a in range(rank):
        th.comps[a] = Y.hcoeff[a]
        tv.comps[a] = Y.vcoeff[a]
    return th, tv


def cov_deriv_section(dc: DConnection, X: TangentSection,
                      Y: TangentSection) -> TangentSection:
    """D_X Y with Y split into its (1,0;0,0) and (0,0;1,0) parts; the
    distinguished connection preserves the splitting."""
    th, tv = _section_as_tensors(dc.rank, Y)
    dh = cov_deriv(dc, X, th)
    dv = cov_deriv(dc, X, tv)
    return TangentSection(tuple(dh.comps[a] for a in range(dc.rank)),
                          tuple(dv.comps[a] for a in range(dc.rank)))


# ---------------------------------------------------------------------------
# torsion
# ---------------------------------------------------------------------------

def torsion_components(dc: DConnection) -> dict:
    """The five torsion families, as derived from
    T(X, Y) = D_X Y - D_Y X - [X, Y] on the adapted frame:

        T^a_{bc}    = H^a_{bc} - H^a_{cb} + L^a_{bc} o h o pi
        Ttil^a_{bc} = R^a_{bc}
        P^a_{bc}    = V^a_{bc}
        Ptil^a_{bc} = d'_c Gamma^a_b - Htil^a_{cb}
        S^a_{bc}    = Vtil^a_{bc} - Vtil^a_{cb}
    """
    if dc._torsion_cache is not None:
        return dc._torsion_cache
    conn = dc.conn
    r = dc.rank
    R = conn.curvature_R()
    T = [[[dc.H[a][b][c] - dc.H[a][c][b] + conn.alg.L_h(a, b, c)
           for c in range(r)] for b in range(r)] for a in range(r)]
    Ttil = [[[R[a][b][c] for c in range(r)] for b in range(r)] for a in range(r)]
    P = [[[dc.V[a][b][c] for c in range(r)] for b in range(r)] for a in range(r)]
    Ptil = [[[y_deriv(conn.gamma[a][b], c) - dc.Htil[a][c][b]
              for c in range(r)] for b in range(r)] for a in range(r)]
    S = [[[dc.Vtil[a][b][c] - dc.Vtil[a][c][b]
           for c in range(r)] for b in range(r)] for a in range(r)]
    dc._torsion_cache = {"T": T, "Ttil": Ttil, "P": P, "Ptil": Ptil, "S": S}
    return dc._torsion_cache


def torsion_operator(dc: DConnection, X: TangentSection,
                     Y: TangentSection) -> TangentSection:
    """T(X, Y) = D_X Y - D_Y X - [X, Y] (the defining operator)."""
    return (cov_deriv_section(dc, X, Y) - cov_deriv_section(dc, Y, X)
            - section_bracket(dc.conn, X, Y))


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------

def curvature_components(dc: DConnection) -> dict:
    """The six curvature families R(frame_d, frame_c) frame_b = ..^a, from
    R(Y, Z)X = D_Y D_Z X - D_Z D_Y X - D_[Y,Z] X on the adapted frame.

    Indexing: family[a][b][c][d] with b the differentiated slot and (c, d)
    the bracket pair (d outermost).
    """
    if dc._curvature_cache is not None:
        return dc._curvature_cache
    conn = dc.conn
    r = dc.rank
    Rnl = conn.curvature_R()

    def delta(c, e):
        return conn.delta_action(c, e)

    def fam_hh(Hc, Vc):
        out = [[[[ZERO] * r for _ in range(r)] for _ in range(r)] for _ in range(r)]
        for a in range(r):
            for b in range(r):
                for c in range(r):
                    for d in range(r):
                        acc = delta(d, Hc[a][b][c]) - delta(c, Hc[a][b][d])
                        for e in range(r):
                            acc = acc + mul(Hc[a][e][d], Hc[e][b][c])
                            acc = acc - mul(Hc[a][e][c], Hc[e][b][d])
                            acc = acc + mul(conn.alg.L_h(e, c, d), Hc[a][b][e])
                            acc = acc + mul(Rnl[e][c][d], Vc[a][b][e])
                        out[a][b][c][d] = acc
        return out

    def fam_hv(Hc, Vc):
        out = [[[[ZERO] * r for _ in range(r)] for _ in range(r)] for _ in range(r)]
        for a in range(r):
            for b in range(r):
                for c in range(r):
                    for d in range(r):
                        acc = y_deriv(Hc[a][b][c], d) - delta(c, Vc[a][b][d])
                        for e in range(r):
                            acc = acc + mul(Vc[a][e][d], Hc[e][b][c])
                            acc = acc - mul(Hc[a][e][c], Vc[e][b][d])
                            acc = acc + mul(y_deriv(conn.gamma[e][c], d), Vc[a][b][e])
                        out[a][b][c][d] = acc
        return out

    def fam_vv(Vc):
        out = [[[[ZERO] * r for _ in range(r)] for _ in range(r)] for _ in range(r)]
        for a in range(r):
            for b in range(r):
                for c in range(r):
                    for d in range(r):
                        acc = y_deriv(Vc[a][b][c], d) - y_deriv(Vc[a][b][d], c)
                        for e in range(r):
                            acc = acc + mul(Vc[a][e][d], Vc[e][b][c])
                            acc = acc - mul(Vc[a][e][c], Vc[e][b][d])
                        out[a][b][c][d] = acc
        return out

    dc._curvature_cache = {
        "R": fam_hh(dc.H, dc.V),
        "Rtil": fam_hh(dc.Htil, dc.Vtil),
        "P": fam_hv(dc.H, dc.V),
        "Ptil": fam_hv(dc.Htil, dc.Vtil),
        "S": fam_vv(dc.V),
        "Stil": fam_vv(dc.Vtil),
    }
    return dc._curvature_cache


def curvature_operator(dc: DConnection, Y: TangentSection, Z: TangentSection,
                       X: TangentSection) -> TangentSection:
    """R(Y, Z)X = D_Y D_Z X - D_Z D_Y X - D_[Y,Z] X."""
    return (cov_deriv_section(dc, Y, cov_deriv_section(dc, Z, X))
            - cov_deriv_section(dc, Z, cov_deriv_section(dc, Y, X))
            - cov_deriv_section(dc, section_bracket(dc.conn, Y, Z), X))


def mixed_curvature(dc: DConnection, X: TangentSection, Y: TangentSection,
                    Z: TangentSection) -> TangentSection:
    """Mixed curvature P(X, Y)Z = R(V X, H Y)Z, expanded through the
    hv-curvature families:

        Xdot^d Y^c Z^b P^a_{b cd} delta_a + Xdot^d Y^c Zdot^b Ptil^a_{b cd} vert_a
    """
    fams = curvature_components(dc)
    r = dc.rank
    hires = []
    vires = []
    for a in range(r):
        acc_h: Expr = ZERO
        acc_v: Expr = ZERO
        for d in range(r):
            if X.vcoeff[d] == ZERO:
                continue
            for c in range(r):
                if Y.hcoeff[c] == ZERO:
                    continue
                w = mul(X.vcoeff[d], Y.hcoeff[c])
                for b in range(r):
                    acc_h = acc_h + mul(w, mul(Z.hcoeff[b], fams["P"][a][b][c][d]))
                    acc_v = acc_v + mul(w, mul(Z.vcoeff[b], fams["Ptil"][a][b][c][d]))
        hires.append(acc_h)
        vires.append(acc_v)
    return TangentSection(tuple(hires), tuple(vires))


# ---------------------------------------------------------------------------
# identity suites
# ---------------------------------------------------------------------------

def operator_component_checks(dc: DConnection, samples, tol) -> list[CheckResult]:
    """Torsion and curvature component families against their defining
    operators on the adapted frame sections."""
    conn = dc.conn
    r = dc.rank
    tor = torsion_components(dc)
    cur = curvature_components(dc)
    deltas = [conn.frame_delta(a) for a in range(r)]
    verts = [conn.frame_vertical(a) for a in range(r)]

    tor_res: list[Expr] = []
    for b in range(r):
        for c in range(r):
            tdd = torsion_operator(dc, deltas[c], deltas[b])
            tvd = torsion_operator(dc, verts[c], deltas[b])
            tvv = torsion_operator(dc, verts[c], verts[b])
            for a in range(r):
                tor_res.append(tdd.hcoeff[a] - tor["T"][a][b][c])
                tor_res.append(tdd.vcoeff[a] - tor["Ttil"][a][b][c])
                tor_res.append(tvd.hcoeff[a] - tor["P"][a][b][c])
                tor_res.append(tvd.vcoeff[a] - tor["Ptil"][a][b][c])
                tor_res.append(tvv.vcoeff[a] - tor["S"][a][b][c])
                tor_res.append(tvv.hcoeff[a])

    cur_res: list[Expr] = []
    for b in range(r):
        for c in range(r):
            for d in range(r):
                rdd_h = curvature_operator(dc, deltas[d], deltas[c], deltas[b])
                rdd_v = curvature_operator(dc, deltas[d], deltas[c], verts[b])
                rvd_h = curvature_operator(dc, verts[d], deltas[c], deltas[b])
                rvd_v = curvature_operator(dc, verts[d], deltas[c], verts[b])
                rvv_h = curvature_operator(dc, verts[d], verts[c], deltas[b])
                rvv_v = curvature_operator(dc, verts[d], verts[c], verts[b])
                for a in range(r):
                    cur_res.append(rdd_h.hcoeff[a] - cur["R"][a][b][c][d])
                    cur_res.append(rdd_v.vcoeff[a] - cur["Rtil"][a][b][c][d])
                    cur_res.append(rvd_h.hcoeff[a] - cur["P"][a][b][c][d])
                    cur_res.append(rvd_v.vcoeff[a] - cur["Ptil"][a][b][c][d])
                    cur_res.append(rvv_h.hcoeff[a] - cur["S"][a][b][c][d])
                    cur_res.append(rvv_v.vcoeff[a] - cur["Stil"][a][b][c][d])
                    # splitting preservation: the off parts vanish
                    cur_res.append(rdd_h.vcoeff[a])
                    cur_res.append(rdd_v.hcoeff[a])

    return [
        worst_over_points("torsion operator vs components", max_abs_fields(tor_res),
                          samples, tol, anchor="five torsion families"),
        worst_over_points("curvature operator vs components", max_abs_fields(cur_res),
                          samples, tol, anchor="six curvature families (reclaim1-3)"),
    ]


def ricci_check(dc: DConnection, Y: TangentSection, samples, tol) -> list[CheckResult]:
    """The six Ricci-type commutation formulas for the horizontal and
    vertical component families of a section.

    The mixed commutation lines admit two readings of their final
    correction term; the connection-coefficient reading fails on any
    Berwald connection, so the hv-torsion correction (the V-component term
    -P^e_{cb} Y^a_{|e}) is primary and the literal reading is evaluated
    alongside as a transcription diagnostic.
    """
    r = dc.rank
    tor = torsion_components(dc)
    cur = curvature_components(dc)

    def families(tensor_part: str):
        # slot ordering is (hu, hl, vu, vl), so the differential indices land
        # in different array positions for the horizontal and vertical parts
        if tensor_part == "h":
            T0 = TensorField(TensorSig(1, 0, 0, 0), r)
            for a in range(r):
                T0.comps[a] = Y.hcoeff[a]
            fam_r, fam_p, fam_s = cur["R"], cur["P"], cur["S"]
            H_lit = dc.H
            A_ = lambda t, a, c: t.comps[a, c]            # Y^a_{|c}
            AB_ = lambda t, a, c, b: t.comps[a, c, b]     # Y^a_{|c|b}
            Av_ = lambda t, a, c, b: t.comps[a, c, b]     # Y^a_{|c}|_b
            B_ = lambda t, a, b: t.comps[a, b]            # Y^a|_b
            Bh_ = lambda t, a, c, b: t.comps[a, c, b]     # Y^a|_b {}_{|c}
            Bv_ = lambda t, a, b, c: t.comps[a, b, c]     # Y^a|_b|_c
        else:
            T0 = TensorField(TensorSig(0, 0, 1, 0), r)
            for a in range(r):
                T0.comps[a] = Y.vcoeff[a]
            fam_r, fam_p, fam_s = cur["Rtil"], cur["Ptil"], cur["Stil"]
            H_lit = dc.Htil
            A_ = lambda t, a, c: t.comps[c, a]
            AB_ = lambda t, a, c, b: t.comps[c, b, a]
            Av_ = lambda t, a, c, b: t.comps[c, a, b]
            B_ = lambda t, a, b: t.comps[a, b]
            Bh_ = lambda t, a, c, b: t.comps[c, a, b]
            Bv_ = lambda t, a, b, c: t.comps[a, b, c]
        A = horizontal_differential(dc, T0)
        B = vertical_differential(dc, T0)
        AB = horizontal_differential(dc, A)
        Av = vertical_differential(dc, A)
        Bh = horizontal_differential(dc, B)
        Bv = vertical_differential(dc, B)
        comp = [T0.comps[a] for a in range(r)]

        line1, line2, line2_literal, line3 = [], [], [], []
        for a in range(r):
            for b in range(r):
                for c in range(r):
                    lhs = AB_(AB, a, c, b) - AB_(AB, a, b, c)
                    rhs: Expr = ZERO
                    for e in range(r):
                        rhs = rhs + mul(fam_r[a][e][c][b], comp[e])
                        rhs = rhs + mul(tor["Ttil"][e][b][c], B_(B, a, e))
                        # the hh-torsion already carries the L o h o pi term,
                        # so no separate structure-function summand appears
                        rhs = rhs + mul(tor["T"][e][b][c], A_(A, a, e))
                    line1.append(lhs - rhs)

                    lhs = Av_(Av, a, c, b) - Bh_(Bh, a, c, b)
                    rhs = ZERO
                    rhs_lit = ZERO
                    for e in range(r):
                        com = mul(fam_p[a][e][c][b], comp[e]) \
                            - mul(tor["Ptil"][e][c][b], B_(B, a, e))
                        rhs = rhs + com - mul(tor["P"][e][c][b], A_(A, a, e))
                        rhs_lit = rhs_lit + com - mul(H_lit[e][b][c], B_(B, a, e))
                    line2.append(lhs - rhs)
                    line2_literal.append(lhs - rhs_lit)

                    lhs = Bv_(Bv, a, c, b) - Bv_(Bv, a, b, c)
                    rhs = ZERO
                    for e in range(r):
                        rhs = rhs + mul(fam_s[a][e][c][b], comp[e])
                        rhs = rhs + mul(tor["S"][e][b][c], B_(B, a, e))
                    line3.append(lhs - rhs)
        return line1, line2, line2_literal, line3

    results = []
    for part, label in (("h", "fr1"), ("v", "fr2")):
        l1, l2, l2_lit, l3 = families(part)
        results.append(worst_over_points(
            f"Ricci {label} line 1 (|c|b)", max_abs_fields(l1), samples, tol,
            anchor=f"Ricci {label}"))
        main = worst_over_points(
            f"Ricci {label} line 2 (|c then v)", max_abs_fields(l2), samples, tol,
            anchor=f"Ricci {label}")
        lit = worst_over_points("literal", max_abs_fields(l2_lit), samples, tol,
                                anchor="")
        if main.status == "pass" and lit.status == "fail":
            main.status = "mismatch-flag"
            main.anchor += " (literal H-coefficient reading fails; P-torsion reading used)"
        results.append(main)
        results.append(worst_over_points(
            f"Ricci {label} line 3 (v twice)", max_abs_fields(l3), samples, tol,
            anchor=f"Ricci {label}"))
    return results


def _cov_deriv_torsion(dc, X, Y, Z) -> TangentSection:
    """(D_X T)(Y, Z) for the torsion tensor."""
    return (cov_deriv_section(dc, X, torsion_operator(dc, Y, Z))
            - torsion_operator(dc, cov_deriv_section(dc, X, Y), Z)
            - torsion_operator(dc, Y, cov_deriv_section(dc, X, Z)))


def _cov_deriv_curvature(dc, X, Y, Z, U) -> TangentSection:
    """(D_X R)(Y, Z)U for the curvature tensor."""
    return (cov_deriv_section(dc, X, curvature_operator(dc, Y, Z, U))
            - curvature_operator(dc, cov_deriv_section(dc, X, Y), Z, U)
            - curvature_operator(dc, Y, cov_deriv_section(dc, X, Z), U)
            - curvature_operator(dc, Y, Z, cov_deriv_section(dc, X, U)))


def bianchi_check(dc: DConnection, X: TangentSection, Y: TangentSection,
                  Z: TangentSection, U: TangentSection, samples, tol) -> list[CheckResult]:
    """Operator-form Bianchi identities, horizontal and vertical parts:

      first kind:  sum_cyc(X,Y,Z) { (D_X T)(Y,Z) - R(X,Y)Z + T(T(X,Y),Z) } = 0
      second kind: sum_cyc(X,Y,Z) { (D_X R)(Y,Z)U + R(T(X,Y),Z)U } = 0

    The derivative terms are covariant derivatives of the torsion/curvature
    tensors and the second identity cycles (X, Y, Z) with U fixed; both hold
    on any structure whose bracket satisfies the Jacobi identity.
    """
    r = dc.rank
    zero = TangentSection((ZERO,) * r, (ZERO,) * r)
    first = zero
    second = zero
    for (A, B, C) in ((X, Y, Z), (Y, Z, X), (Z, X, Y)):
        first = first + _cov_deriv_torsion(dc, A, B, C)
        first = first - curvature_operator(dc, A, B, C)
        first = first + torsion_operator(dc, torsion_operator(dc, A, B), C)
        second = second + _cov_deriv_curvature(dc, A, B, C, U)
        second = second + curvature_operator(dc, torsion_operator(dc, A, B), C, U)
    return [
        worst_over_points("Bianchi first kind, horizontal",
                          max_abs_fields(list(first.hcoeff)), samples, tol,
                          anchor="Bianchi fr7"),
        worst_over_points("Bianchi first kind, vertical",
                          max_abs_fields(list(first.vcoeff)), samples, tol,
                          anchor="Bianchi fr7"),
        worst_over_points("Bianchi second kind, horizontal",
                          max_abs_fields(list(second.hcoeff)), samples, tol,
                          anchor="Bianchi fr8"),
        worst_over_points("Bianchi second kind, vertical",
                          max_abs_fields(list(second.vcoeff)), samples, tol,
                          anchor="Bianchi fr8"),
    ]


def fr6_check(dc: DConnection, X: TangentSection, Y: TangentSection,
              Z: TangentSection, U: TangentSection, samples, tol) -> list[CheckResult]:
    """Splitting identities of the curvature operator: the vertical part of
    R(X,Y) H Z, the horizontal part of R(X,Y) V Z, the same after one more
    covariant derivative, and the H/V reassembly of R(X,Y)Z."""
    from .connection import apply_H, apply_V
    r = dc.rank
    RH = curvature_operator(dc, X, Y, apply_H(Z))
    RV = curvature_operator(dc, X, Y, apply_V(Z))
    DRH = cov_deriv_section(dc, X, curvature_operator(dc, Y, Z, apply_H(U)))
    DRV = cov_deriv_section(dc, X, curvature_operator(dc, Y, Z, apply_V(U)))
    full = curvature_operator(dc, X, Y, Z)
    resplit = RH + RV - full
    fields = {
        "remark fr6: V R(X,Y)HZ = 0": list(RH.vcoeff),
        "remark fr6: H R(X,Y)VZ = 0": list(RV.hcoeff),
        "remark fr6: V D_X(R(Y,Z)HU) = 0": list(DRH.vcoeff),
        "remark fr6: H D_X(R(Y,Z)VU) = 0": list(DRV.hcoeff),
        "remark fr6: R = HRH + VRV": list(resplit.hcoeff) + list(resplit.vcoeff),
    }
    return [worst_over_points(name, max_abs_fields(fs), samples, tol, anchor="Remark fr6")
            for name, fs in fields.items()]

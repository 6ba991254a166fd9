"""Generalized Lie algebroids in coordinates.

The ambient structure is a rank-r bundle over an m-dimensional base carrying
anchor components rho^i_a(x), antisymmetric structure functions L^c_{ab}(x)
and a pair of base diffeomorphisms (h, eta).  Sections of the pull-back
bundle over the total space are the engine's probe objects; their bracket
only differentiates along the base, with the anchor twisted through h.

All index arrays are 0-based; expression variables keep their 1-based
grammar names (x1..xm, y1..yr).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .expr import (
    Expr, FiberPoint, ZERO, const, evaluate, mul, neg, substitute, uses_fiber,
    x_deriv, xvar,
)
from .report import CheckResult, worst_over_points

__all__ = [
    "DiffeoMap", "GhMorphism", "GenAlgebroid", "PullbackSection",
    "identity_map", "identity_morphism",
    "anchored_action", "pullback_bracket", "validate_axioms",
]


@dataclass(frozen=True)
class DiffeoMap:
    """Base diffeomorphism given by forward and inverse component lists.

    Inverses are user-supplied, not computed; validate_axioms checks the
    composition residual pointwise.
    """

    fwd: tuple
    inv: tuple

    def __post_init__(self):
        if len(self.fwd) != len(self.inv):
            raise ValueError("fwd and inv must have the same length")
        for e in self.fwd + self.inv:
            if uses_fiber(e):
                raise ValueError("diffeomorphism components must be base-only")

    @property
    def dim(self) -> int:
        return len(self.fwd)

    def apply_fwd(self, x) -> tuple:
        return tuple(evaluate(e, x, ()) for e in self.fwd)

    def apply_inv(self, x) -> tuple:
        return tuple(evaluate(e, x, ()) for e in self.inv)

    def compose(self, e: Expr) -> Expr:
        """e o (this map): substitute x -> fwd(x)."""
        return substitute(e, self.fwd)


def identity_map(m: int) -> DiffeoMap:
    comps = tuple(xvar(i + 1) for i in range(m))
    return DiffeoMap(comps, comps)


@dataclass(frozen=True)
class GhMorphism:
    """Locally invertible fiber morphism g^a_b(x) with supplied inverse
    gtil^b_a(x), used by lifts, sprays and the almost tangent structure."""

    g: tuple        # g[a][b] = g^a_b, rows = upper index
    gtil: tuple     # gtil[b][a] = gtil^b_a

    def __post_init__(self):
        r = len(self.g)
        for row in self.g + self.gtil:
            if len(row) != r:
                raise ValueError("g and gtil must be square of equal rank")
            for e in row:
                if uses_fiber(e):
                    raise ValueError("morphism components must be base-only")

    @property
    def rank(self) -> int:
        return len(self.g)


def identity_morphism(r: int) -> GhMorphism:
    rows = tuple(tuple(const(1.0) if a == b else ZERO for b in range(r))
                 for a in range(r))
    return GhMorphism(rows, rows)


class GenAlgebroid:
    """Coordinate data (m, r, rho, L, h, eta) of a generalized Lie algebroid.

    L is stored only for index pairs a < b; the antisymmetric extension is
    derived, so L^c_{ab} = -L^c_{ba} holds structurally.
    """

    def __init__(self, m: int, r: int, rho, L: dict, h: DiffeoMap | None = None,
                 eta: DiffeoMap | None = None):
        self.m = int(m)
        self.r = int(r)
        self.rho = [[rho[i][a] for a in range(r)] for i in range(m)]
        for row in self.rho:
            for e in row:
                if uses_fiber(e):
                    raise ValueError("anchor components must be base-only")
        self._L: dict[tuple[int, int, int], Expr] = {}
        for (c, a, b), e in L.items():
            if not (0 <= c < r and 0 <= a < b < r):
                raise ValueError(
                    f"structure key {(c, a, b)} must satisfy 0 <= a < b < r")
            if uses_fiber(e):
                raise ValueError("structure functions must be base-only")
            self._L[(c, a, b)] = e
        self.h = h if h is not None else identity_map(m)
        self.eta = eta if eta is not None else identity_map(m)
        if self.h.dim != m or self.eta.dim != m:
            raise ValueError("h and eta must be diffeomorphisms of the base")
        self._rho_h: list | None = None
        self._L_h: dict[tuple[int, int, int], Expr] = {}

    # -- structure functions -----------------------------------------------

    def L(self, c: int, a: int, b: int) -> Expr:
        """L^c_{ab}, antisymmetry derived from the a < b storage."""
        if a == b:
            return ZERO
        if a < b:
            return self._L.get((c, a, b), ZERO)
        return neg(self._L.get((c, b, a), ZERO))

    def L_h(self, c: int, a: int, b: int) -> Expr:
        """L^c_{ab} o h o pi (cached; called from deep index loops)."""
        key = (c, a, b)
        hit = self._L_h.get(key)
        if hit is None:
            hit = self.h.compose(self.L(c, a, b))
            self._L_h[key] = hit
        return hit

    def rho_h(self, i: int, a: int) -> Expr:
        """rho^i_a o h o pi (cached)."""
        if self._rho_h is None:
            self._rho_h = [[self.h.compose(self.rho[i][a])
                            for a in range(self.r)] for i in range(self.m)]
        return self._rho_h[i][a]


@dataclass(frozen=True)
class PullbackSection:
    """Section X = X^a S_a of the pull-back bundle; coefficients are
    expressions on the total space."""

    coeff: tuple

    @property
    def rank(self) -> int:
        return len(self.coeff)


def coordinate_section(r: int, a: int) -> PullbackSection:
    return PullbackSection(tuple(const(1.0) if b == a else ZERO for b in range(r)))


def anchored_action(alg: GenAlgebroid, u: PullbackSection, f: Expr) -> Expr:
    """Action of the twisted anchor of a base-only section u on a base
    function f, as an evaluable field on the base.

    Componentwise, with z = (h o eta)^{-1}(x):
        sum_{i,j,a} (dh^j/dx^i)(eta(z)) rho^i_a(z) u^a(z) (df/dx^j)(x),
    and eta(z) = h^{-1}(x) since eta o eta^{-1} = id.
    """
    if uses_fiber(f):
        raise ValueError("f must be a base-only function")
    for e in u.coeff:
        if uses_fiber(e):
            raise ValueError("u must have base-only coefficients")
    if u.rank != alg.r:
        raise ValueError("section rank does not match the algebroid")
    h_inv = list(alg.h.inv)
    z = [substitute(comp, h_inv) for comp in alg.eta.inv]   # (h o eta)^{-1}
    out: Expr = ZERO
    for j in range(alg.m):
        dfj = x_deriv(f, j)
        if dfj == ZERO:
            continue
        for i in range(alg.m):
            dh = substitute(x_deriv(alg.h.fwd[j], i), h_inv)
            for a in range(alg.r):
                term = mul(mul(dh, substitute(alg.rho[i][a], z)),
                           mul(substitute(u.coeff[a], z), dfj))
                out = out + term
    return out


def pullback_bracket(alg: GenAlgebroid, X: PullbackSection,
                     Y: PullbackSection) -> PullbackSection:
    """Bracket of pull-back sections:

        [X, Y]^c = X^a Y^b (L^c_{ab} o h o pi)
                 + X^a (rho^i_a o h o pi) d_i Y^c
                 - Y^b (rho^i_b o h o pi) d_i X^c
    """
    if X.rank != alg.r or Y.rank != alg.r:
        raise ValueError("section rank does not match the algebroid")
    out = []
    for c in range(alg.r):
        acc: Expr = ZERO
        for a in range(alg.r):
            for b in range(alg.r):
                acc = acc + mul(mul(X.coeff[a], Y.coeff[b]), alg.L_h(c, a, b))
        for a in range(alg.r):
            for i in range(alg.m):
                acc = acc + mul(mul(X.coeff[a], alg.rho_h(i, a)),
                                x_deriv(Y.coeff[c], i))
                acc = acc - mul(mul(Y.coeff[a], alg.rho_h(i, a)),
                                x_deriv(X.coeff[c], i))
        out.append(acc)
    return PullbackSection(tuple(out))


def validate_axioms(alg: GenAlgebroid, samples: list[FiberPoint], tol: float,
                    gh: GhMorphism | None = None) -> list[CheckResult]:
    """Pointwise residuals of the structural axioms: diffeomorphism inverse
    compositions, fiber-morphism inverse (when supplied), and the Jacobi
    identity of the pull-back bracket on coordinate sections."""
    if not samples:
        raise ValueError("at least one sample point is required")
    results = []
    for name, dmap in (("diffeo h inverse", alg.h), ("diffeo eta inverse", alg.eta)):
        def residual(p: FiberPoint, dmap=dmap) -> float:
            back = dmap.apply_inv(dmap.apply_fwd(p.x))
            forth = dmap.apply_fwd(dmap.apply_inv(p.x))
            return max(max(abs(b - v) for b, v in zip(back, p.x)),
                       max(abs(f - v) for f, v in zip(forth, p.x)))
        results.append(worst_over_points(name, residual, samples, tol,
                                         anchor="diffeomorphism restriction"))
    if gh is not None:
        def g_residual(p: FiberPoint) -> float:
            worst = 0.0
            for b in range(gh.rank):
                for a in range(gh.rank):
                    s = sum(evaluate(gh.gtil[b][c], p.x, ()) *
                            evaluate(gh.g[c][a], p.x, ()) for c in range(gh.rank))
                    worst = max(worst, abs(s - (1.0 if a == b else 0.0)))
            return worst
        results.append(worst_over_points("morphism inverse (eq39)", g_residual,
                                         samples, tol, anchor="locally invertible (g,h)"))
    results.append(_jacobi_check(alg, samples, tol))
    return results


def _jacobi_check(alg: GenAlgebroid, samples, tol) -> CheckResult:
    r = alg.r
    residual_fields: list[Expr] = []
    sections = [coordinate_section(r, a) for a in range(r)]
    for a in range(r):
        for b in range(a + 1, r):
            for c in range(b + 1, r):
                total = [ZERO] * r
                for (p, q, s) in ((a, b, c), (b, c, a), (c, a, b)):
                    inner = pullback_bracket(alg, sections[q], sections[s])
                    outer = pullback_bracket(alg, sections[p], inner)
                    total = [t + o for t, o in zip(total, outer.coeff)]
                residual_fields.extend(total)

    def residual(pt: FiberPoint) -> float:
        if not residual_fields:
            return 0.0
        return max(abs(evaluate(e, pt.x, pt.y)) for e in residual_fields)

    return worst_over_points("Jacobi identity", residual, samples, tol,
                             anchor="Lie algebra axiom of the bracket")

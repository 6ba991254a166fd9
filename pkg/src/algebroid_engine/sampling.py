"""Deterministic sample clouds and random polynomial probe fields.

Identity suites are checked pointwise on seeded uniform samples from a box
(default [-1, 1]^m x [-1, 1]^r); homogeneity checks exclude a ball around
the zero section where 1-homogeneous functions are non-smooth.
"""

from __future__ import annotations

import numpy as np

from .expr import Expr, FiberPoint, const, mul, powi, xvar, yvar, ZERO

__all__ = ["sample_box", "random_poly_expr", "random_coeff_matrix"]


def sample_box(m: int, r: int, n: int, seed: int,
               box_x: tuple[float, float] = (-1.0, 1.0),
               box_y: tuple[float, float] = (-1.0, 1.0),
               y_min: float = 0.0) -> list[FiberPoint]:
    """n uniform points from the box; fiber parts with |y| < y_min are
    rejected and redrawn (deterministic for a fixed seed)."""
    rng = np.random.default_rng(seed)
    points: list[FiberPoint] = []
    while len(points) < n:
        x = rng.uniform(box_x[0], box_x[1], size=m)
        y = rng.uniform(box_y[0], box_y[1], size=r)
        if y_min > 0.0 and r > 0 and float(np.linalg.norm(y)) < y_min:
            continue
        points.append(FiberPoint(tuple(float(v) for v in x),
                                 tuple(float(v) for v in y)))
    return points


def random_poly_expr(rng: np.random.Generator, m: int, r: int,
                     degree: int = 2, terms: int = 3,
                     fiber: bool = True) -> Expr:
    """Small random polynomial with integer coefficients in [-2, 2].

    Used as probe data: polynomial fields keep every identity smooth on the
    whole box and finite differences well conditioned.
    """
    nvars = m + (r if fiber else 0)
    e: Expr = ZERO
    for _ in range(terms):
        c = int(rng.integers(-2, 3))
        if c == 0:
            c = 1
        term: Expr = const(float(c))
        total = int(rng.integers(0, degree + 1))
        for _ in range(total):
            k = int(rng.integers(0, nvars)) if nvars else 0
            v = xvar(k + 1) if k < m else yvar(k - m + 1)
            term = mul(term, v)
        e = e + term
    return e


def random_coeff_matrix(rng: np.random.Generator, shape: tuple[int, ...],
                        m: int, r: int, degree: int = 2,
                        fiber: bool = True) -> np.ndarray:
    """Object array of random polynomial Exprs with the given index shape."""
    out = np.empty(shape, dtype=object)
    for idx in np.ndindex(*shape):
        out[idx] = random_poly_expr(rng, m, r, degree=degree, fiber=fiber)
    return out

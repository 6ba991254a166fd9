"""Shared test utilities: deterministic rngs, finite-difference oracles,
random polynomial fields and sample clouds."""

from __future__ import annotations

import zlib

import numpy as np

from algebroid_engine.expr import Expr, FiberPoint, Var, const, evaluate
from algebroid_engine.sampling import random_poly_expr, sample_box

__all__ = ["rng_for", "central_fd", "random_poly_expr", "sample_points"]


def rng_for(tag: str) -> np.random.Generator:
    """Deterministic generator keyed by a test tag."""
    return np.random.default_rng(zlib.crc32(tag.encode()))


def sample_points(m: int, r: int, n: int, seed: int, lo: float = -1.0,
                  hi: float = 1.0, y_min: float = 0.0) -> list[FiberPoint]:
    return sample_box(m, r, n, seed, box_x=(lo, hi), box_y=(lo, hi), y_min=y_min)


def central_fd(e: Expr, p: FiberPoint, var: Var, step: float = 1e-6) -> float:
    """Central finite difference of e at p along var."""
    x_plus, y_plus = list(p.x), list(p.y)
    x_minus, y_minus = list(p.x), list(p.y)
    if var.kind == "x":
        x_plus[var.index - 1] += step
        x_minus[var.index - 1] -= step
    else:
        y_plus[var.index - 1] += step
        y_minus[var.index - 1] -= step
    return (evaluate(e, x_plus, y_plus) - evaluate(e, x_minus, y_minus)) / (2 * step)

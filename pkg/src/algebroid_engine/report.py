"""Check results shared by the library and the batch interface.

Every identity suite reduces to named residuals.  A result records the
check name, a pass/fail status, the worst residual with the point that
produced it, and a short anchor string for traceability.
"""

from __future__ import annotations

from dataclasses import dataclass

from .expr import FiberPoint, evaluate

__all__ = ["CheckResult", "worst_over_points", "max_abs_fields", "STATUS_ORDER"]

STATUS_ORDER = ("pass", "mismatch-flag", "inconclusive", "fail")


@dataclass
class CheckResult:
    name: str
    status: str                 # pass | fail | inconclusive | mismatch-flag
    max_residual: float | None
    worst_point: FiberPoint | None
    anchor: str

    @property
    def failed(self) -> bool:
        return self.status == "fail"

    def as_json_dict(self) -> dict:
        wp = None
        if self.worst_point is not None:
            wp = {"x": list(self.worst_point.x), "y": list(self.worst_point.y)}
        return {
            "check": self.name,
            "status": self.status,
            "max_residual": self.max_residual,
            "worst_point": wp,
            "anchor": self.anchor,
        }

    def pretty(self) -> str:
        res = "-" if self.max_residual is None else f"{self.max_residual:.3e}"
        return f"[{self.status.upper():<13}] {self.name:<44} max_residual={res:<10} ({self.anchor})"


def worst_over_points(name: str, residual_fn, samples: list[FiberPoint],
                      tol: float, anchor: str) -> CheckResult:
    """Evaluate a pointwise residual over the samples and grade it."""
    worst = 0.0
    worst_pt = samples[0]
    for p in samples:
        v = abs(residual_fn(p))
        if v > worst:
            worst, worst_pt = v, p
    status = "pass" if worst < tol else "fail"
    return CheckResult(name, status, worst, worst_pt, anchor)


def max_abs_fields(fields):
    """Residual function taking the worst of several expression fields at a
    point, with one evaluation memo shared across the fields (the geometry
    layer's trees share most of their subtrees)."""
    def fn(p: FiberPoint) -> float:
        if not fields:
            return 0.0
        memo: dict = {}
        return max(abs(evaluate(e, p.x, p.y, memo)) for e in fields)
    return fn

"""Integral curves, geodesics and parallel lifts.

Geodesics of a mechanical system integrate

    dx^i/dt = rho^i_b(eta(h(x))) g^b_a(h(x)) y^a
    dy^a/dt = -2 (G^a - F^a/4)(x, y)

with a fixed-step classical Runge-Kutta scheme (default dt = 1e-3, no
adaptivity: desk-scale problems are smooth and short-horizon, and a fixed
grid keeps every run bit-reproducible).  Trajectories export to CSV with
full double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebroid import GhMorphism
from .connection import NlConnection
from .expr import DomainError, Expr, evaluate, substitute
from .mech import MechSystem

__all__ = [
    "OdeState", "Trajectory", "IntegrationError",
    "geodesic_rhs", "integrate", "rk4_path",
    "parallel_lift_check", "path_deviation", "resample_by_arclength",
    "trajectory_to_csv",
]


class IntegrationError(RuntimeError):
    """Field evaluation failed mid-trajectory; carries the partial result."""

    def __init__(self, message: str, partial: "Trajectory"):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class OdeState:
    t: float
    x: tuple
    y: tuple

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.t, *self.x, *self.y)):
            raise ValueError("non-finite ODE state")


@dataclass
class Trajectory:
    """Uniform-step trajectory: times[k], xs[k] (N x m), ys[k] (N x r)."""

    times: np.ndarray
    xs: np.ndarray
    ys: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.all(np.diff(self.times) > 0):
            raise ValueError("trajectory times must be strictly increasing")

    def state(self, k: int) -> OdeState:
        return OdeState(float(self.times[k]),
                        tuple(float(v) for v in self.xs[k]),
                        tuple(float(v) for v in self.ys[k]))

    @property
    def final(self) -> OdeState:
        return self.state(len(self.times) - 1)


# ---------------------------------------------------------------------------
# right-hand sides and the integrator
# ---------------------------------------------------------------------------

def geodesic_rhs(sys: MechSystem, state: OdeState) -> tuple:
    """(dx/dt, dy/dt) of the geodesic system at a state."""
    m, r = sys.m, sys.r
    hx = sys.alg.h.apply_fwd(state.x)
    ehx = sys.alg.eta.apply_fwd(hx)
    gv = [sum(evaluate(sys.gh.g[b][a], hx, ()) * state.y[a] for a in range(r))
          for b in range(r)]
    dx = tuple(sum(evaluate(sys.alg.rho[i][b], ehx, ()) * gv[b] for b in range(r))
               for i in range(m))
    dy = tuple(-2.0 * evaluate(sys.Gq(a), state.x, state.y) for a in range(r))
    return dx, dy


def rk4_path(f, t0: float, state0: np.ndarray, t1: float, dt: float):
    """Classical fixed-step RK4 on a flat state vector; returns (times,
    states) including the initial state.  The number of steps is rounded so
    the grid lands on t1 exactly (uniform step contract)."""
    if dt <= 0 or t1 <= t0:
        raise ValueError("need dt > 0 and t1 > t0")
    nsteps = max(1, int(round((t1 - t0) / dt)))
    h = (t1 - t0) / nsteps
    times = np.empty(nsteps + 1)
    states = np.empty((nsteps + 1, len(state0)))
    times[0] = t0
    states[0] = state0
    s = np.array(state0, dtype=float)
    t = t0
    for k in range(nsteps):
        k1 = f(t, s)
        k2 = f(t + h / 2, s + (h / 2) * k1)
        k3 = f(t + h / 2, s + (h / 2) * k2)
        k4 = f(t + h, s + h * k3)
        s = s + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + (k + 1) * h
        times[k + 1] = t
        states[k + 1] = s
    return times, states


def integrate(sys: MechSystem, state0: OdeState, t1: float, dt: float) -> Trajectory:
    """Geodesic trajectory from state0 to time t1.

    Field domain errors abort with IntegrationError carrying the partial
    trajectory computed so far.
    """
    m = sys.m

    def f(t, s):
        st = OdeState(t, tuple(s[:m]), tuple(s[m:]))
        dx, dy = geodesic_rhs(sys, st)
        return np.array(dx + dy)

    s0 = np.array(state0.x + state0.y, dtype=float)
    try:
        times, states = rk4_path(f, state0.t, s0, t1, dt)
    except (DomainError, ValueError, OverflowError) as err:
        raise IntegrationError(str(err), _empty_trajectory(sys, state0)) from err
    return Trajectory(times, states[:, :m], states[:, m:],
                      meta={"kind": "geodesic", "dt": dt,
                            "t0": state0.t, "t1": t1})


def _empty_trajectory(sys: MechSystem, state0: OdeState) -> Trajectory:
    return Trajectory(np.array([state0.t]), np.array([state0.x]),
                      np.array([state0.y]), meta={"kind": "aborted"})


# ---------------------------------------------------------------------------
# parallel lift along a base curve
# ---------------------------------------------------------------------------

def parallel_lift_check(conn: NlConnection, gh: GhMorphism, base_curve,
                        u0, t0: float, t1: float, dt: float):
    """Integrate the parallel-transport system of a lift along a base curve
    c(t) (components given as expressions of a single parameter x1 = t):

        du^a/dt + Gamma^a_d(eta(h(c)), u) g^d_b(h(c)) u^b = 0

    Returns (trajectory of u, residual) with the residual the worst defect
    of the equation re-evaluated on the result via interior five-point
    stencils (independent of the integrator's internal derivatives).
    """
    m, r = conn.m, conn.r
    alg = conn.alg

    def curve_x(t: float) -> tuple:
        return tuple(evaluate(e, (t,), ()) for e in base_curve)

    def f(t, u):
        cx = curve_x(t)
        hx = alg.h.apply_fwd(cx)
        ehx = alg.eta.apply_fwd(hx)
        gu = [sum(evaluate(gh.g[d][b], hx, ()) * u[b] for b in range(r))
              for d in range(r)]
        return np.array([
            -sum(evaluate(conn.gamma[a][d], ehx, tuple(u)) * gu[d]
                 for d in range(r))
            for a in range(r)])

    times, us = rk4_path(f, t0, np.array(u0, dtype=float), t1, dt)
    xs = np.array([curve_x(t) for t in times])
    traj = Trajectory(times, xs, us, meta={"kind": "parallel-lift", "dt": dt})

    # five-point interior stencil for du/dt, then the defining equation
    h = times[1] - times[0]
    worst = 0.0
    for k in range(2, len(times) - 2):
        du = (us[k - 2] - 8 * us[k - 1] + 8 * us[k + 1] - us[k + 2]) / (12 * h)
        rhs = f(times[k], us[k])
        worst = max(worst, float(np.max(np.abs(du - rhs))))
    return traj, worst


# ---------------------------------------------------------------------------
# path comparison
# ---------------------------------------------------------------------------

def resample_by_arclength(xs: np.ndarray, nodes: int = 256) -> np.ndarray:
    """Resample a polyline at uniform normalized arc length (linear
    interpolation); collapses to a constant row for zero-length paths."""
    seg = np.linalg.norm(np.diff(xs, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    if total == 0.0:
        return np.repeat(xs[:1], nodes, axis=0)
    s /= total
    grid = np.linspace(0.0, 1.0, nodes)
    out = np.empty((nodes, xs.shape[1]))
    for j in range(xs.shape[1]):
        out[:, j] = np.interp(grid, s, xs[:, j])
    return out


def path_deviation(xs_a: np.ndarray, xs_b: np.ndarray, nodes: int = 256) -> float:
    """Maximum euclidean deviation between two paths after arc-length
    resampling; the parametrization-free metric of the projective suite."""
    ra = resample_by_arclength(xs_a, nodes)
    rb = resample_by_arclength(xs_b, nodes)
    return float(np.max(np.linalg.norm(ra - rb, axis=1)))


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

def trajectory_to_csv(traj: Trajectory) -> str:
    """CSV with header t,x1..xm,y1..yr; one row per step, 17 significant
    digits."""
    m = traj.xs.shape[1]
    r = traj.ys.shape[1]
    header = ",".join(["t"] + [f"x{i+1}" for i in range(m)]
                      + [f"y{a+1}" for a in range(r)])
    lines = [header]
    for k in range(len(traj.times)):
        row = [traj.times[k], *traj.xs[k], *traj.ys[k]]
        lines.append(",".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"

"""Flat key/value system configuration files.

Fields are formulas, so the portable carrier is the expression grammar of
the expr module; everything else is plain scalars.  Grammar of a file:

    # comment (to end of line)
    key = value

with keys

    m, r                      dimensions (required, first)
    rho[i][a]                 anchor components, base-only (default 0)
    L[c][a][b]                structure functions, a < b, base-only (default 0)
    h.fwd[i], h.inv[i]        base diffeomorphism h (default identity)
    eta.fwd[i], eta.inv[i]    base diffeomorphism eta (default identity)
    g[a][b], gtil[a][b]       fiber morphism and inverse (default identity)
    Gamma[a][c]               explicit nonlinear connection (optional)
    G[a], F[a]                spray coefficients and external force (default 0)
    f                         projective factor (optional)
    x0[i], y0[a], t0, t1      initial state and horizon for trajectories
    box.x, box.y              sample box "lo, hi" (default -1, 1)
    samples, seed             sample count (default 100) and seed (default 42)
    symbolic_tol, fd_tol, dt  tolerances (1e-9, 1e-6) and ODE step (1e-3)

All indices are 1-based in the file and follow the grammar names.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .algebroid import DiffeoMap, GenAlgebroid, GhMorphism, identity_map, identity_morphism
from .connection import NlConnection
from .expr import Expr, ZERO, const, parse as parse_expr, uses_fiber, xvar
from .mech import MechSystem, canonical_connection

__all__ = ["SystemConfig", "ConfigError", "load_config", "parse_config"]


class ConfigError(ValueError):
    """Malformed configuration; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


_INDEXED = re.compile(r"^([A-Za-z][A-Za-z0-9]*(?:\.[A-Za-z][A-Za-z0-9]*)?)((?:\[\d+\])*)$")


@dataclass
class SystemConfig:
    m: int
    r: int
    rho: list
    L: dict
    h: DiffeoMap
    eta: DiffeoMap
    g: tuple
    gtil: tuple
    gamma: list | None
    G: tuple
    F: tuple
    f: Expr | None
    x0: tuple
    y0: tuple
    t0: float
    t1: float
    box_x: tuple
    box_y: tuple
    samples: int
    seed: int
    symbolic_tol: float
    fd_tol: float
    dt: float

    def algebroid(self) -> GenAlgebroid:
        return GenAlgebroid(self.m, self.r, self.rho, self.L,
                            h=self.h, eta=self.eta)

    def morphism(self) -> GhMorphism:
        return GhMorphism(self.g, self.gtil)

    def mech_system(self) -> MechSystem:
        return MechSystem(self.algebroid(), self.morphism(), self.F, self.G)

    def connection(self) -> NlConnection:
        """Explicit Gamma when given, else the canonical connection of the
        mechanical system."""
        sys = self.mech_system()
        if self.gamma is not None:
            return NlConnection(sys.alg, self.gamma, gh=sys.gh)
        conn = canonical_connection(sys)
        return conn


def load_config(path: str) -> SystemConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def parse_config(text: str) -> SystemConfig:
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", lineno)
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError("empty key or value", lineno)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        entries[key] = (value, lineno)

    def take(key: str, default: str | None = None) -> tuple[str, int] | None:
        if key in entries:
            return entries.pop(key)
        if default is None:
            return None
        return (default, 0)

    def take_int(key: str, default: str | None = None) -> int:
        got = take(key, default)
        if got is None:
            raise ConfigError(f"{key} is required")
        value, lineno = got
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {value!r}", lineno) from None

    def take_float(key: str, default: str) -> float:
        value, lineno = take(key, default)
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {value!r}", lineno) from None

    def take_pair(key: str, default: str) -> tuple:
        value, lineno = take(key, default)
        parts = [p.strip() for p in value.split(",")]
        if len(parts) != 2:
            raise ConfigError(f"{key} must be 'lo, hi'", lineno)
        try:
            lo, hi = float(parts[0]), float(parts[1])
        except ValueError:
            raise ConfigError(f"{key} must be numeric", lineno) from None
        if not lo < hi:
            raise ConfigError(f"{key} needs lo < hi", lineno)
        return lo, hi

    m = take_int("m")
    r = take_int("r")
    if m < 1 or r < 1:
        raise ConfigError("m and r must be positive")

    def expr_of(value: str, lineno: int, base_only: bool = False) -> Expr:
        try:
            e = parse_expr(value, m, r)
        except Exception as err:
            raise ConfigError(f"bad expression {value!r}: {err}", lineno) from None
        if base_only and uses_fiber(e):
            raise ConfigError("expression must be base-only here", lineno)
        return e

    # collect indexed families
    indexed: dict[str, dict[tuple, tuple[str, int]]] = {}
    for key in list(entries):
        match = _INDEXED.match(key)
        if match is None:
            raise ConfigError(f"unrecognized key {key!r}", entries[key][1])
        name, idx_text = match.groups()
        if not idx_text:
            continue
        idx = tuple(int(v) - 1 for v in re.findall(r"\[(\d+)\]", idx_text))
        indexed.setdefault(name, {})[idx] = entries.pop(key)

    def family(name: str, shape: tuple, default: Expr, base_only: bool,
               identity: bool = False):
        got = indexed.pop(name, {})
        out = _nested(shape, default)
        if identity:
            for i in range(shape[0]):
                _set_nested(out, (i, i), const(1.0))
        for idx, (value, lineno) in got.items():
            if len(idx) != len(shape) or any(
                    not 0 <= k < n for k, n in zip(idx, shape)):
                raise ConfigError(
                    f"{name} index {tuple(k + 1 for k in idx)} out of range", lineno)
            _set_nested(out, idx, expr_of(value, lineno, base_only))
        return out

    rho = family("rho", (m, r), ZERO, base_only=True)
    if ("g" in indexed) != ("gtil" in indexed):
        raise ConfigError("g and gtil must be supplied together "
                          "(inverses are user data, not computed)")
    g = family("g", (r, r), ZERO, base_only=True, identity=True)
    gtil = family("gtil", (r, r), ZERO, base_only=True, identity=True)
    G = family("G", (r,), ZERO, base_only=False)
    F = family("F", (r,), ZERO, base_only=False)

    L: dict[tuple, Expr] = {}
    for idx, (value, lineno) in indexed.pop("L", {}).items():
        if len(idx) != 3:
            raise ConfigError("L needs three indices [c][a][b]", lineno)
        c, a, b = idx
        if not (0 <= c < r and 0 <= a < b < r):
            raise ConfigError("L indices need 1 <= a < b <= r", lineno)
        L[(c, a, b)] = expr_of(value, lineno, base_only=True)

    gamma = None
    if "Gamma" in indexed:
        gamma = family("Gamma", (r, r), ZERO, base_only=False)

    def diffeo(prefix: str) -> DiffeoMap:
        fwd = indexed.pop(f"{prefix}.fwd", None)
        inv = indexed.pop(f"{prefix}.inv", None)
        if fwd is None and inv is None:
            return identity_map(m)
        if fwd is None or inv is None:
            raise ConfigError(f"{prefix} needs both {prefix}.fwd and {prefix}.inv")
        def comps(table):
            out = [xvar(i + 1) for i in range(m)]
            for idx, (value, lineno) in table.items():
                if len(idx) != 1 or not 0 <= idx[0] < m:
                    raise ConfigError(f"{prefix} component index out of range", lineno)
                out[idx[0]] = expr_of(value, lineno, base_only=True)
            return tuple(out)
        return DiffeoMap(comps(fwd), comps(inv))

    h = diffeo("h")
    eta = diffeo("eta")

    x0 = [0.0] * m
    for idx, (value, lineno) in indexed.pop("x0", {}).items():
        if len(idx) != 1 or not 0 <= idx[0] < m:
            raise ConfigError("x0 index out of range", lineno)
        x0[idx[0]] = float(value)
    y0 = [1.0] * r
    for idx, (value, lineno) in indexed.pop("y0", {}).items():
        if len(idx) != 1 or not 0 <= idx[0] < r:
            raise ConfigError("y0 index out of range", lineno)
        y0[idx[0]] = float(value)

    if indexed:
        name = next(iter(indexed))
        raise ConfigError(f"unrecognized indexed key {name!r}",
                          next(iter(indexed[name].values()))[1])

    f_entry = take("f")
    f = expr_of(*f_entry) if f_entry is not None else None

    cfg = SystemConfig(
        m=m, r=r, rho=rho, L=L, h=h, eta=eta,
        g=tuple(tuple(row) for row in g),
        gtil=tuple(tuple(row) for row in gtil),
        gamma=gamma, G=tuple(G), F=tuple(F), f=f,
        x0=tuple(x0), y0=tuple(y0),
        t0=take_float("t0", "0"), t1=take_float("t1", "1"),
        box_x=take_pair("box.x", "-1, 1"), box_y=take_pair("box.y", "-1, 1"),
        samples=take_int("samples", "100"), seed=take_int("seed", "42"),
        symbolic_tol=take_float("symbolic_tol", "1e-9"),
        fd_tol=take_float("fd_tol", "1e-6"),
        dt=take_float("dt", "1e-3"),
    )
    if entries:
        key = next(iter(entries))
        raise ConfigError(f"unrecognized key {key!r}", entries[key][1])
    if cfg.samples < 1:
        raise ConfigError("samples must be >= 1")
    return cfg


def _nested(shape: tuple, fill):
    if len(shape) == 1:
        return [fill] * shape[0]
    return [_nested(shape[1:], fill) for _ in range(shape[0])]


def _set_nested(table, idx: tuple, value):
    for k in idx[:-1]:
        table = table[k]
    table[idx[-1]] = value

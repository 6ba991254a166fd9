"""Arithmetic expression trees over chart coordinates.

All smooth fields of the engine (anchor components, structure functions,
connection coefficients, spray coefficients, forces, morphism components)
live on a single global chart R^m x R^r with base coordinates x1..xm and
fiber coordinates y1..yr.  They are carried as immutable expression trees
closed under exact symbolic differentiation; third derivatives stay exact,
which the projective-change checks require.

Grammar (bit-exact, also used by the config files):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' int)?
    base   := number | ident | func '(' expr ')' | '(' expr ')'

with ident in {x1..xm, y1..yr} and func in {sin, cos, exp, log, sqrt, neg}.

Only constant folding is performed (folding of constant subtrees and of
identities with constant operands such as e+0, 1*e, e^1).  No other
rewriting, so a printed tree re-parses to a structurally equal tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

__all__ = [
    "Expr", "Const", "Var", "Unary", "Binary", "Pow",
    "Point", "FiberPoint",
    "ParseError", "DomainError",
    "parse", "const", "xvar", "yvar",
    "add", "sub", "mul", "div", "neg", "powi", "fun",
    "diff", "x_deriv", "y_deriv", "substitute", "evaluate", "eval_at",
    "ZERO", "ONE",
]

_FUNCS = ("neg", "sin", "cos", "exp", "log", "sqrt")
_BINOPS = ("add", "sub", "mul", "div")


class ParseError(ValueError):
    """Syntax or arity error while parsing; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class DomainError(ArithmeticError):
    """Evaluation hit an invalid operand (division by zero, log of a
    non-positive number, square root of a negative number)."""


class Expr:
    """Base node.  Immutable; sharing subtrees between expressions is safe."""

    __slots__ = ()

    # -- arithmetic sugar (routes through the folding constructors) --------
    def __add__(self, other: "Expr") -> "Expr":
        return add(self, other)

    def __sub__(self, other: "Expr") -> "Expr":
        return sub(self, other)

    def __mul__(self, other: "Expr") -> "Expr":
        return mul(self, other)

    def __truediv__(self, other: "Expr") -> "Expr":
        return div(self, other)

    def __pow__(self, n: int) -> "Expr":
        return powi(self, n)

    def __neg__(self) -> "Expr":
        return neg(self)

    def eval(self, x: Sequence[float], y: Sequence[float] = ()) -> float:
        return evaluate(self, x, y)

    def diff(self, var: "Var") -> "Expr":
        return diff(self, var)

    def __str__(self) -> str:
        return _print(self, 0)


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: float

    __slots__ = ("value",)

    def __str__(self) -> str:
        return _print(self, 0)


@dataclass(frozen=True, eq=True)
class Var(Expr):
    kind: str   # "x" (base) or "y" (fiber)
    index: int  # 1-based, matching the grammar names x1..xm / y1..yr

    __slots__ = ("kind", "index")

    def __post_init__(self):
        if self.kind not in ("x", "y"):
            raise ValueError(f"variable kind must be 'x' or 'y', got {self.kind!r}")
        if self.index < 1:
            raise ValueError(f"variable index must be >= 1, got {self.index}")

    def __str__(self) -> str:
        return _print(self, 0)


@dataclass(frozen=True, eq=True)
class Unary(Expr):
    op: str
    arg: Expr

    __slots__ = ("op", "arg")

    def __str__(self) -> str:
        return _print(self, 0)


@dataclass(frozen=True, eq=True)
class Binary(Expr):
    op: str
    lhs: Expr
    rhs: Expr

    __slots__ = ("op", "lhs", "rhs")

    def __str__(self) -> str:
        return _print(self, 0)


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    base: Expr
    exponent: int  # constant integer exponent keeps diff closed

    __slots__ = ("base", "exponent")

    def __str__(self) -> str:
        return _print(self, 0)


ZERO = Const(0.0)
ONE = Const(1.0)


@dataclass(frozen=True)
class Point:
    """Base point x in R^m."""

    x: tuple

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.x):
            raise ValueError("point coordinates must be finite")


@dataclass(frozen=True)
class FiberPoint:
    """Bundle point (x, y) in R^m x R^r."""

    x: tuple
    y: tuple

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.x + self.y):
            raise ValueError("point coordinates must be finite")


# ---------------------------------------------------------------------------
# folding constructors
# ---------------------------------------------------------------------------

def const(v: float) -> Const:
    return Const(float(v))


def xvar(i: int) -> Var:
    return Var("x", i)


def yvar(a: int) -> Var:
    return Var("y", a)


def _is_const(e: Expr, v: float | None = None) -> bool:
    return isinstance(e, Const) and (v is None or e.value == v)


def add(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return Binary("add", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    return Binary("sub", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return Binary("mul", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b) and b.value != 0.0:
        return Const(a.value / b.value)
    if _is_const(a, 0.0) and not _is_const(b, 0.0):
        return ZERO
    if _is_const(b, 1.0):
        return a
    return Binary("div", a, b)


def neg(e: Expr) -> Expr:
    if _is_const(e):
        return Const(-e.value)
    return Unary("neg", e)


def powi(base: Expr, n: int) -> Expr:
    n = int(n)
    if n == 0:
        return ONE
    if n == 1:
        return base
    if _is_const(base) and not (base.value == 0.0 and n < 0):
        try:
            folded = base.value ** n
        except OverflowError:
            folded = math.inf
        if math.isfinite(folded):
            return Const(folded)
    return Pow(base, n)


def fun(name: str, arg: Expr) -> Expr:
    if name not in _FUNCS:
        raise ValueError(f"unknown function {name!r}")
    if name == "neg":
        return neg(arg)
    if isinstance(arg, Const):
        try:
            folded = _apply_fun(name, arg.value)
        except (DomainError, OverflowError):
            pass  # keep the node; the error surfaces on evaluation
        else:
            if math.isfinite(folded):
                return Const(folded)
    return Unary(name, arg)


def _apply_fun(name: str, v: float) -> float:
    if name == "neg":
        return -v
    if name == "sin":
        return math.sin(v)
    if name == "cos":
        return math.cos(v)
    if name == "exp":
        return math.exp(v)
    if name == "log":
        if v <= 0.0:
            raise DomainError(f"log of non-positive value {v}")
        return math.log(v)
    if name == "sqrt":
        if v < 0.0:
            raise DomainError(f"sqrt of negative value {v}")
        return math.sqrt(v)
    raise ValueError(name)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def evaluate(e: Expr, x: Sequence[float], y: Sequence[float] = (),
             memo: dict | None = None) -> float:
    """IEEE double evaluation at base coordinates x, fiber coordinates y.

    Raises DomainError on division by exact zero and on invalid log/sqrt/pow
    operands; never returns NaN silently.  An optional memo dict (valid only
    for a fixed point) caches shared subtrees across calls; trees built by
    the geometry layer share subtrees heavily, so identity suites pass one
    memo per sample point.
    """
    if memo is None:
        memo = {}
    # iterative post-order walk: derivative trees get deep enough that a
    # recursive evaluator would flirt with the interpreter stack limit
    stack = [e]
    while stack:
        node = stack[-1]
        key = id(node)
        if key in memo:
            stack.pop()
            continue
        if type(node) is Const:
            memo[key] = node.value
            stack.pop()
        elif type(node) is Var:
            coords = x if node.kind == "x" else y
            if node.index > len(coords):
                raise ValueError(
                    f"variable {node.kind}{node.index} out of range for point "
                    f"of arity ({len(x)}, {len(y)})")
            memo[key] = float(coords[node.index - 1])
            stack.pop()
        elif type(node) is Unary:
            ak = id(node.arg)
            if ak in memo:
                try:
                    memo[key] = _apply_fun(node.op, memo[ak])
                except OverflowError:
                    raise DomainError("overflow in function evaluation") from None
                stack.pop()
            else:
                stack.append(node.arg)
        elif type(node) is Binary:
            lk, rk = id(node.lhs), id(node.rhs)
            lv = memo.get(lk)
            rv = memo.get(rk)
            if lk in memo and rk in memo:
                op = node.op
                if op == "add":
                    memo[key] = lv + rv
                elif op == "sub":
                    memo[key] = lv - rv
                elif op == "mul":
                    memo[key] = lv * rv
                elif op == "div":
                    if rv == 0.0:
                        raise DomainError("division by zero")
                    memo[key] = lv / rv
                else:
                    raise ValueError(op)
                stack.pop()
            else:
                if lk not in memo:
                    stack.append(node.lhs)
                if rk not in memo:
                    stack.append(node.rhs)
        elif type(node) is Pow:
            bk = id(node.base)
            if bk in memo:
                b = memo[bk]
                if b == 0.0 and node.exponent < 0:
                    raise DomainError("zero raised to a negative power")
                try:
                    memo[key] = b ** node.exponent
                except OverflowError:
                    raise DomainError("overflow in power evaluation") from None
                stack.pop()
            else:
                stack.append(node.base)
        else:
            raise TypeError(f"not an Expr node: {node!r}")
    return memo[id(e)]


def eval_at(e: Expr, p: FiberPoint) -> float:
    """Evaluation at a bundle point."""
    return evaluate(e, p.x, p.y)


# ---------------------------------------------------------------------------
# differentiation
# ---------------------------------------------------------------------------

# derivatives of shared subtrees are requested over and over by the index
# loops of the geometry layer; the cache is id-keyed and keeps a strong
# reference to the key tree so ids cannot be recycled underneath it
_DIFF_CACHE: dict = {}
_DIFF_CACHE_LIMIT = 400_000


def diff(e: Expr, var: Var) -> Expr:
    """Exact symbolic partial derivative; closed under repeated application."""
    key = (id(e), var.kind, var.index)
    hit = _DIFF_CACHE.get(key)
    if hit is not None and hit[0] is e:
        return hit[1]
    result = _diff(e, var)
    if len(_DIFF_CACHE) >= _DIFF_CACHE_LIMIT:
        _DIFF_CACHE.clear()
    _DIFF_CACHE[key] = (e, result)
    return result


def _diff(e: Expr, var: Var) -> Expr:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if (e.kind == var.kind and e.index == var.index) else ZERO
    if isinstance(e, Unary):
        da = diff(e.arg, var)
        if e.op == "neg":
            return neg(da)
        if e.op == "sin":
            return mul(fun("cos", e.arg), da)
        if e.op == "cos":
            return neg(mul(fun("sin", e.arg), da))
        if e.op == "exp":
            return mul(e, da)
        if e.op == "log":
            return div(da, e.arg)
        if e.op == "sqrt":
            return div(da, mul(const(2.0), e))
        raise ValueError(e.op)
    if isinstance(e, Binary):
        da = diff(e.lhs, var)
        db = diff(e.rhs, var)
        if e.op == "add":
            return add(da, db)
        if e.op == "sub":
            return sub(da, db)
        if e.op == "mul":
            return add(mul(da, e.rhs), mul(e.lhs, db))
        if e.op == "div":
            num = sub(mul(da, e.rhs), mul(e.lhs, db))
            return div(num, powi(e.rhs, 2))
        raise ValueError(e.op)
    if isinstance(e, Pow):
        db = diff(e.base, var)
        return mul(mul(const(float(e.exponent)), powi(e.base, e.exponent - 1)), db)
    raise TypeError(f"not an Expr node: {e!r}")


def x_deriv(e: Expr, i: int) -> Expr:
    """d/dx^i with i 0-based (convenience for index loops)."""
    return diff(e, Var("x", i + 1))


def y_deriv(e: Expr, a: int) -> Expr:
    """d/dy^a with a 0-based."""
    return diff(e, Var("y", a + 1))


# ---------------------------------------------------------------------------
# substitution
# ---------------------------------------------------------------------------

def substitute(e: Expr, xsub: Sequence[Expr] | None,
               ysub: Sequence[Expr] | None = None) -> Expr:
    """Replace x_i by xsub[i-1] and y_a by ysub[a-1] (None keeps a group).

    Composition with a base map h is substitute(f, h_components): the result
    is f(h(x), y) as a tree, so chain rules fall out of plain diff.
    """
    if isinstance(e, Const):
        return e
    if isinstance(e, Var):
        table = xsub if e.kind == "x" else ysub
        if table is None:
            return e
        if e.index > len(table):
            raise ValueError(f"no substitute for {e.kind}{e.index}")
        return table[e.index - 1]
    if isinstance(e, Unary):
        return fun(e.op, substitute(e.arg, xsub, ysub)) if e.op != "neg" \
            else neg(substitute(e.arg, xsub, ysub))
    if isinstance(e, Binary):
        a = substitute(e.lhs, xsub, ysub)
        b = substitute(e.rhs, xsub, ysub)
        return {"add": add, "sub": sub, "mul": mul, "div": div}[e.op](a, b)
    if isinstance(e, Pow):
        return powi(substitute(e.base, xsub, ysub), e.exponent)
    raise TypeError(f"not an Expr node: {e!r}")


def max_indices(e: Expr) -> tuple[int, int]:
    """Largest base / fiber variable index used (0 if none)."""
    mx = mr = 0
    for node in _walk(e):
        if isinstance(node, Var):
            if node.kind == "x":
                mx = max(mx, node.index)
            else:
                mr = max(mr, node.index)
    return mx, mr


def uses_fiber(e: Expr) -> bool:
    return any(isinstance(n, Var) and n.kind == "y" for n in _walk(e))


def _walk(e: Expr) -> Iterator[Expr]:
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Unary):
            stack.append(node.arg)
        elif isinstance(node, Binary):
            stack.append(node.lhs)
            stack.append(node.rhs)
        elif isinstance(node, Pow):
            stack.append(node.base)


# ---------------------------------------------------------------------------
# printing (re-parses to a structurally equal tree)
# ---------------------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4


def _print(e: Expr, parent_prec: int, right_of: str | None = None) -> str:
    if isinstance(e, Const):
        v = e.value
        if v < 0.0 or (v == 0.0 and math.copysign(1.0, v) < 0.0):
            # negative literals are not in the grammar; print through neg()
            return f"neg({_fmt_number(-v)})"
        return _fmt_number(v)
    if isinstance(e, Var):
        return f"{e.kind}{e.index}"
    if isinstance(e, Unary):
        return f"{e.op}({_print(e.arg, 0)})"
    if isinstance(e, Pow):
        base = _print(e.base, _PREC_ATOM)
        s = f"{base}^{e.exponent}"
        # factor := base ('^' int)? admits a single exponent, so a Pow in
        # any tighter context (including another Pow's base) needs parens
        if parent_prec > _PREC_POW:
            return f"({s})"
        return s
    if isinstance(e, Binary):
        prec = _PREC_ADD if e.op in ("add", "sub") else _PREC_MUL
        sym = {"add": "+", "sub": "-", "mul": "*", "div": "/"}[e.op]
        lhs = _print(e.lhs, prec)
        rhs = _print(e.rhs, prec + 1)  # left-associative grammar
        s = f"{lhs}{sym}{rhs}"
        if prec < parent_prec:
            return f"({s})"
        return s
    raise TypeError(f"not an Expr node: {e!r}")


def _fmt_number(v: float) -> str:
    if math.isfinite(v) and v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


# ---------------------------------------------------------------------------
# parser (recursive descent over the grammar above)
# ---------------------------------------------------------------------------

class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self) -> str:
        c = self.peek()
        self.pos += 1
        return c

    def match(self, c: str) -> bool:
        if self.peek() == c:
            self.pos += 1
            return True
        return False

    def expect(self, c: str):
        if not self.match(c):
            raise ParseError(f"expected {c!r}", self.pos)


def parse(text: str, m: int, r: int) -> Expr:
    """Parse text against the expression grammar with arity (m, r).

    Raises ParseError (with position) on syntax errors and on variable
    indices outside 1..m / 1..r.
    """
    sc = _Scanner(text)
    e = _parse_expr(sc, m, r)
    sc.skip_ws()
    if sc.pos != len(text):
        raise ParseError("trailing input", sc.pos)
    return e


def _parse_expr(sc: _Scanner, m: int, r: int) -> Expr:
    e = _parse_term(sc, m, r)
    while True:
        c = sc.peek()
        if c == "+":
            sc.take()
            e = add(e, _parse_term(sc, m, r))
        elif c == "-":
            sc.take()
            e = sub(e, _parse_term(sc, m, r))
        else:
            return e


def _parse_term(sc: _Scanner, m: int, r: int) -> Expr:
    e = _parse_factor(sc, m, r)
    while True:
        c = sc.peek()
        if c == "*":
            sc.take()
            e = mul(e, _parse_factor(sc, m, r))
        elif c == "/":
            sc.take()
            e = div(e, _parse_factor(sc, m, r))
        else:
            return e


def _parse_factor(sc: _Scanner, m: int, r: int) -> Expr:
    e = _parse_base(sc, m, r)
    if sc.peek() == "^":
        sc.take()
        n = _parse_int(sc)
        e = powi(e, n)
    return e


def _parse_base(sc: _Scanner, m: int, r: int) -> Expr:
    c = sc.peek()
    if c == "(":
        sc.take()
        e = _parse_expr(sc, m, r)
        sc.expect(")")
        return e
    if c.isdigit() or c == ".":
        return _parse_number(sc)
    if c.isalpha():
        return _parse_ident(sc, m, r)
    raise ParseError(f"unexpected character {c!r}" if c else "unexpected end of input",
                     sc.pos)


def _parse_number(sc: _Scanner) -> Expr:
    sc.skip_ws()
    start = sc.pos
    text = sc.text
    n = len(text)
    i = start
    while i < n and (text[i].isdigit() or text[i] == "."):
        i += 1
    if i < n and text[i] in "eE":
        j = i + 1
        if j < n and text[j] in "+-":
            j += 1
        if j < n and text[j].isdigit():
            i = j
            while i < n and text[i].isdigit():
                i += 1
    token = text[start:i]
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"bad number {token!r}", start) from None
    if not math.isfinite(value):
        raise ParseError(f"number {token!r} overflows a double", start)
    sc.pos = i
    return Const(value)


def _parse_int(sc: _Scanner) -> int:
    sc.skip_ws()
    start = sc.pos
    text = sc.text
    i = start
    if i < len(text) and text[i] == "-":
        i += 1
    while i < len(text) and text[i].isdigit():
        i += 1
    token = text[start:i]
    if not token or token == "-":
        raise ParseError("expected integer exponent", start)
    sc.pos = i
    return int(token)


def _parse_ident(sc: _Scanner, m: int, r: int) -> Expr:
    sc.skip_ws()
    start = sc.pos
    text = sc.text
    i = start
    while i < len(text) and (text[i].isalnum() or text[i] == "_"):
        i += 1
    name = text[start:i]
    sc.pos = i
    if name in _FUNCS:
        sc.expect("(")
        arg = _parse_expr(sc, m, r)
        sc.expect(")")
        return fun(name, arg)
    if len(name) >= 2 and name[0] in "xy" and name[1:].isdigit():
        kind, index = name[0], int(name[1:])
        bound = m if kind == "x" else r
        if not 1 <= index <= bound:
            raise ParseError(
                f"variable {name} out of arity (m, r) = ({m}, {r})", start)
        return Var(kind, index)
    raise ParseError(f"unknown identifier {name!r}", start)

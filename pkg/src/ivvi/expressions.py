"""Piecewise-smooth scalar expressions over R^n.

The grammar (whitespace insensitive)::

    expr   := term (("+"|"-") term)*
    term   := factor ("*" factor)*
    factor := "-" factor | atom ("^" INT)?
    atom   := NUMBER | VAR | FUNC "(" expr ("," expr)* ")" | "(" expr ")"
    VAR    := "x" INT          (1-based)
    FUNC   := abs | max | min | exp | log | sin | cos

Division is deliberately absent so every expression stays locally Lipschitz
on all of R^n.  Expression trees are immutable after parsing and all
operations here are pure functions.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

SELECTION_CAP = 64


class ExprSyntaxError(ValueError):
    """Raised on malformed expression text; carries the 0-based position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ExprDomainError(ValueError):
    """Raised when evaluation leaves a primitive's domain (log of a non-positive value)."""


class SelectionCapError(ValueError):
    """Raised when tied branches would require more than SELECTION_CAP gradient selections."""


class Expr:
    """Base class for expression nodes."""

    def __repr__(self) -> str:
        return f"{type(self).__name__}({to_text(self)!r})"


@dataclass(frozen=True, repr=False)
class Const(Expr):
    value: float


@dataclass(frozen=True, repr=False)
class Var(Expr):
    index: int  # 1-based


@dataclass(frozen=True, repr=False)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, repr=False)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, repr=False)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, repr=False)
class Pow(Expr):
    base: Expr
    exponent: int

    def __post_init__(self) -> None:
        if not isinstance(self.exponent, int) or self.exponent < 1:
            raise ValueError(f"Pow exponent must be a positive integer, got {self.exponent!r}")


@dataclass(frozen=True, repr=False)
class Neg(Expr):
    child: Expr


@dataclass(frozen=True, repr=False)
class Abs(Expr):
    child: Expr


@dataclass(frozen=True, repr=False)
class Max(Expr):
    children: tuple

    def __post_init__(self) -> None:
        if len(self.children) < 2:
            raise ValueError("max needs at least two arguments")


@dataclass(frozen=True, repr=False)
class Min(Expr):
    children: tuple

    def __post_init__(self) -> None:
        if len(self.children) < 2:
            raise ValueError("min needs at least two arguments")


@dataclass(frozen=True, repr=False)
class Exp(Expr):
    child: Expr


@dataclass(frozen=True, repr=False)
class Log(Expr):
    child: Expr


@dataclass(frozen=True, repr=False)
class Sin(Expr):
    child: Expr


@dataclass(frozen=True, repr=False)
class Cos(Expr):
    child: Expr


@dataclass(frozen=True)
class ActiveBranchSet:
    """Gradients of all smooth selections through the branches active at a point."""

    gradients: tuple
    is_smooth_point: bool

    def __post_init__(self) -> None:
        if not self.gradients:
            raise ValueError("active branch set must be nonempty")


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*^(),])"
)

_FUNCTIONS = {"abs": 1, "exp": 1, "log": 1, "sin": 1, "cos": 1, "max": None, "min": None}
_VAR_NAME = re.compile(r"^x([1-9][0-9]*)$")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, dimension: int):
        self.tokens = _tokenize(text)
        self.dimension = dimension
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, value, pos = self.peek()
        if kind != "op" or value != op:
            raise ExprSyntaxError(f"expected {op!r}, found {value or 'end of input'!r}", pos)
        return self.advance()

    def parse(self) -> Expr:
        node = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected trailing input {value!r}", pos)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                rhs = self.term()
                node = Add(node, rhs) if value == "+" else Sub(node, rhs)
            else:
                return node

    def term(self) -> Expr:
        node = self.factor()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value == "*":
                self.advance()
                node = Mul(node, self.factor())
            else:
                return node

    def factor(self) -> Expr:
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return Neg(self.factor())
        node = self.atom()
        kind, value, pos = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            kind, value, pos = self.peek()
            if kind != "num" or not re.fullmatch(r"\d+", value):
                raise ExprSyntaxError("exponent must be a positive integer", pos)
            self.advance()
            exponent = int(value)
            if exponent < 1:
                raise ExprSyntaxError("exponent must be >= 1", pos)
            node = Pow(node, exponent)
        return node

    def atom(self) -> Expr:
        kind, value, pos = self.advance()
        if kind == "num":
            return Const(float(value))
        if kind == "name":
            var = _VAR_NAME.match(value)
            if var:
                index = int(var.group(1))
                if index > self.dimension:
                    raise ExprSyntaxError(
                        f"variable {value} exceeds dimension {self.dimension}", pos)
                return Var(index)
            if value not in _FUNCTIONS:
                raise ExprSyntaxError(f"unknown name {value!r}", pos)
            self.expect_op("(")
            args = [self.expr()]
            while True:
                kind2, value2, _ = self.peek()
                if kind2 == "op" and value2 == ",":
                    self.advance()
                    args.append(self.expr())
                else:
                    break
            self.expect_op(")")
            return self._build_call(value, args, pos)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(f"unexpected token {value or 'end of input'!r}", pos)

    def _build_call(self, name: str, args, pos: int) -> Expr:
        arity = _FUNCTIONS[name]
        if arity == 1:
            if len(args) != 1:
                raise ExprSyntaxError(f"{name} takes exactly one argument, got {len(args)}", pos)
            cls = {"abs": Abs, "exp": Exp, "log": Log, "sin": Sin, "cos": Cos}[name]
            return cls(args[0])
        if len(args) < 2:
            raise ExprSyntaxError(f"{name} takes at least two arguments, got {len(args)}", pos)
        return Max(tuple(args)) if name == "max" else Min(tuple(args))


def parse(text: str, dimension: int) -> Expr:
    """Parse ``text`` into an expression over variables x1..x<dimension>."""
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    return _Parser(text, dimension).parse()


# ---------------------------------------------------------------------------
# Printing (canonical; parse(to_text(e)) reproduces e)
# ---------------------------------------------------------------------------

_LEVEL_SUM, _LEVEL_TERM, _LEVEL_FACTOR, _LEVEL_ATOM = 0, 1, 2, 3


def _level(e: Expr) -> int:
    if isinstance(e, (Add, Sub)):
        return _LEVEL_SUM
    if isinstance(e, Mul):
        return _LEVEL_TERM
    if isinstance(e, (Neg, Pow)):
        return _LEVEL_FACTOR
    return _LEVEL_ATOM


def _fmt(e: Expr, min_level: int) -> str:
    text = _fmt_bare(e)
    if _level(e) < min_level:
        return f"({text})"
    return text


def _fmt_bare(e: Expr) -> str:
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Add):
        return f"{_fmt(e.left, _LEVEL_SUM)} + {_fmt(e.right, _LEVEL_TERM)}"
    if isinstance(e, Sub):
        return f"{_fmt(e.left, _LEVEL_SUM)} - {_fmt(e.right, _LEVEL_TERM)}"
    if isinstance(e, Mul):
        return f"{_fmt(e.left, _LEVEL_TERM)} * {_fmt(e.right, _LEVEL_FACTOR)}"
    if isinstance(e, Neg):
        return f"-{_fmt(e.child, _LEVEL_FACTOR)}"
    if isinstance(e, Pow):
        return f"{_fmt(e.base, _LEVEL_ATOM)}^{e.exponent}"
    if isinstance(e, Abs):
        return f"abs({_fmt(e.child, _LEVEL_SUM)})"
    if isinstance(e, Exp):
        return f"exp({_fmt(e.child, _LEVEL_SUM)})"
    if isinstance(e, Log):
        return f"log({_fmt(e.child, _LEVEL_SUM)})"
    if isinstance(e, Sin):
        return f"sin({_fmt(e.child, _LEVEL_SUM)})"
    if isinstance(e, Cos):
        return f"cos({_fmt(e.child, _LEVEL_SUM)})"
    if isinstance(e, Max):
        return "max(" + ", ".join(_fmt(c, _LEVEL_SUM) for c in e.children) + ")"
    if isinstance(e, Min):
        return "min(" + ", ".join(_fmt(c, _LEVEL_SUM) for c in e.children) + ")"
    raise TypeError(f"unknown node {e!r}")


def to_text(e: Expr) -> str:
    """Canonical text form; round-trips through :func:`parse`."""
    return _fmt(e, _LEVEL_SUM)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def eval_many(e: Expr, points: np.ndarray) -> np.ndarray:
    """Evaluate ``e`` at each row of ``points`` (shape (m, n)); returns shape (m,)."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError("points must be a 2-D array (m, n)")
    return _eval(e, points)


def evaluate(e: Expr, point) -> float:
    """Evaluate ``e`` at a single point."""
    point = np.asarray(point, dtype=float)
    return float(_eval(e, point.reshape(1, -1))[0])


def _eval(e: Expr, pts: np.ndarray) -> np.ndarray:
    if isinstance(e, Const):
        return np.full(pts.shape[0], e.value)
    if isinstance(e, Var):
        if e.index > pts.shape[1]:
            raise ValueError(f"point dimension {pts.shape[1]} too small for x{e.index}")
        return pts[:, e.index - 1].copy()
    if isinstance(e, Add):
        return _eval(e.left, pts) + _eval(e.right, pts)
    if isinstance(e, Sub):
        return _eval(e.left, pts) - _eval(e.right, pts)
    if isinstance(e, Mul):
        return _eval(e.left, pts) * _eval(e.right, pts)
    if isinstance(e, Neg):
        return -_eval(e.child, pts)
    if isinstance(e, Pow):
        return _eval(e.base, pts) ** e.exponent
    if isinstance(e, Abs):
        return np.abs(_eval(e.child, pts))
    if isinstance(e, Max):
        return np.maximum.reduce([_eval(c, pts) for c in e.children])
    if isinstance(e, Min):
        return np.minimum.reduce([_eval(c, pts) for c in e.children])
    if isinstance(e, Exp):
        return np.exp(_eval(e.child, pts))
    if isinstance(e, Log):
        v = _eval(e.child, pts)
        if np.any(v <= 0.0):
            bad = int(np.argmax(v <= 0.0))
            raise ExprDomainError(f"log argument is non-positive ({v[bad]!r}) at point index {bad}")
        return np.log(v)
    if isinstance(e, Sin):
        return np.sin(_eval(e.child, pts))
    if isinstance(e, Cos):
        return np.cos(_eval(e.child, pts))
    raise TypeError(f"unknown node {e!r}")


# ---------------------------------------------------------------------------
# Branch-selection gradients
# ---------------------------------------------------------------------------

def _dedupe(grads) -> list:
    seen = {}
    for g in grads:
        seen.setdefault(tuple(float(v) for v in g), None)
    return [np.array(k) for k in sorted(seen)]


def _combine(left, right, fn):
    out = [fn(a, b) for a in left for b in right]
    out = _dedupe(out)
    if len(out) > SELECTION_CAP:
        raise SelectionCapError(
            f"tied branches produce {len(out)} selections (cap {SELECTION_CAP})")
    return out


def _selections(e: Expr, x: np.ndarray, tol: float):
    """Return (value, gradient list, tied?) for ``e`` at point ``x``."""
    n = x.shape[0]
    if isinstance(e, Const):
        return e.value, [np.zeros(n)], False
    if isinstance(e, Var):
        g = np.zeros(n)
        g[e.index - 1] = 1.0
        return float(x[e.index - 1]), [g], False
    if isinstance(e, Add):
        va, ga, ta = _selections(e.left, x, tol)
        vb, gb, tb = _selections(e.right, x, tol)
        return va + vb, _combine(ga, gb, lambda a, b: a + b), ta or tb
    if isinstance(e, Sub):
        va, ga, ta = _selections(e.left, x, tol)
        vb, gb, tb = _selections(e.right, x, tol)
        return va - vb, _combine(ga, gb, lambda a, b: a - b), ta or tb
    if isinstance(e, Mul):
        va, ga, ta = _selections(e.left, x, tol)
        vb, gb, tb = _selections(e.right, x, tol)
        return va * vb, _combine(ga, gb, lambda a, b: vb * a + va * b), ta or tb
    if isinstance(e, Neg):
        v, g, t = _selections(e.child, x, tol)
        return -v, _dedupe([-gi for gi in g]), t
    if isinstance(e, Pow):
        v, g, t = _selections(e.base, x, tol)
        coeff = e.exponent * v ** (e.exponent - 1)
        return v ** e.exponent, _dedupe([coeff * gi for gi in g]), t
    if isinstance(e, Abs):
        v, g, t = _selections(e.child, x, tol)
        if abs(v) <= tol * (1.0 + abs(v)):
            grads = _dedupe([s * gi for gi in g for s in (1.0, -1.0)])
            if len(grads) > SELECTION_CAP:
                raise SelectionCapError(
                    f"tied branches produce {len(grads)} selections (cap {SELECTION_CAP})")
            return abs(v), grads, True
        sign = 1.0 if v > 0 else -1.0
        return abs(v), _dedupe([sign * gi for gi in g]), t
    if isinstance(e, (Max, Min)):
        parts = [_selections(c, x, tol) for c in e.children]
        values = [p[0] for p in parts]
        best = max(values) if isinstance(e, Max) else min(values)
        scale = tol * (1.0 + max(abs(v) for v in values))
        active = [p for p, v in zip(parts, values) if abs(v - best) <= scale]
        grads = _dedupe([gi for p in active for gi in p[1]])
        if len(grads) > SELECTION_CAP:
            raise SelectionCapError(
                f"tied branches produce {len(grads)} selections (cap {SELECTION_CAP})")
        tied = len(active) > 1 or any(p[2] for p in active)
        return best, grads, tied
    if isinstance(e, Exp):
        v, g, t = _selections(e.child, x, tol)
        ev = math.exp(v)
        return ev, _dedupe([ev * gi for gi in g]), t
    if isinstance(e, Log):
        v, g, t = _selections(e.child, x, tol)
        if v <= 0.0:
            raise ExprDomainError(f"log argument is non-positive ({v!r})")
        return math.log(v), _dedupe([gi / v for gi in g]), t
    if isinstance(e, Sin):
        v, g, t = _selections(e.child, x, tol)
        c = math.cos(v)
        return math.sin(v), _dedupe([c * gi for gi in g]), t
    if isinstance(e, Cos):
        v, g, t = _selections(e.child, x, tol)
        s = -math.sin(v)
        return math.cos(v), _dedupe([s * gi for gi in g]), t
    raise TypeError(f"unknown node {e!r}")


def active_branches(e: Expr, point, tie_tol: float = 1e-9) -> ActiveBranchSet:
    """Enumerate gradients of all smooth selections through the branches active at ``point``.

    At a Max/Min node every child within ``tie_tol`` (scaled by 1 + magnitude)
    of the extremum is active; at an Abs node whose argument is within the
    tolerance of zero both signs are active.  Independent ties combine as a
    Cartesian product, capped at SELECTION_CAP selections.
    """
    x = np.asarray(point, dtype=float)
    if x.ndim != 1:
        raise ValueError("point must be a 1-D vector")
    _, grads, tied = _selections(e, x, tie_tol)
    return ActiveBranchSet(tuple(tuple(g) for g in grads), not tied)


def gradient_many(e: Expr, points: np.ndarray, tie_tol: float = 1e-9):
    """Vectorized single-selection gradient with a tie mask.

    Returns ``(values, grads, tied)`` of shapes (m,), (m, n), (m,).  Where
    ``tied`` is True the gradient is one arbitrary active selection and
    callers must fall back to :func:`active_branches` for the full set.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise ValueError("points must be a 2-D array (m, n)")
    v, g, t = _grad_many(e, pts, tie_tol)
    return v, g, t


def _grad_many(e: Expr, pts: np.ndarray, tol: float):
    m, n = pts.shape
    if isinstance(e, Const):
        return np.full(m, e.value), np.zeros((m, n)), np.zeros(m, dtype=bool)
    if isinstance(e, Var):
        g = np.zeros((m, n))
        g[:, e.index - 1] = 1.0
        return pts[:, e.index - 1].copy(), g, np.zeros(m, dtype=bool)
    if isinstance(e, Add):
        va, ga, ta = _grad_many(e.left, pts, tol)
        vb, gb, tb = _grad_many(e.right, pts, tol)
        return va + vb, ga + gb, ta | tb
    if isinstance(e, Sub):
        va, ga, ta = _grad_many(e.left, pts, tol)
        vb, gb, tb = _grad_many(e.right, pts, tol)
        return va - vb, ga - gb, ta | tb
    if isinstance(e, Mul):
        va, ga, ta = _grad_many(e.left, pts, tol)
        vb, gb, tb = _grad_many(e.right, pts, tol)
        return va * vb, vb[:, None] * ga + va[:, None] * gb, ta | tb
    if isinstance(e, Neg):
        v, g, t = _grad_many(e.child, pts, tol)
        return -v, -g, t
    if isinstance(e, Pow):
        v, g, t = _grad_many(e.base, pts, tol)
        return v ** e.exponent, (e.exponent * v ** (e.exponent - 1))[:, None] * g, t
    if isinstance(e, Abs):
        v, g, t = _grad_many(e.child, pts, tol)
        tie = np.abs(v) <= tol * (1.0 + np.abs(v))
        sign = np.where(v >= 0, 1.0, -1.0)
        return np.abs(v), sign[:, None] * g, t | tie
    if isinstance(e, (Max, Min)):
        parts = [_grad_many(c, pts, tol) for c in e.children]
        values = np.stack([p[0] for p in parts], axis=1)
        best = values.max(axis=1) if isinstance(e, Max) else values.min(axis=1)
        scale = tol * (1.0 + np.abs(values).max(axis=1))
        active = np.abs(values - best[:, None]) <= scale[:, None]
        pick = np.argmax(active, axis=1)
        grads = np.stack([p[1] for p in parts], axis=1)
        g = grads[np.arange(m), pick]
        child_tied = np.stack([p[2] for p in parts], axis=1)
        tied = (active.sum(axis=1) > 1) | (active & child_tied).any(axis=1)
        return best, g, tied
    if isinstance(e, Exp):
        v, g, t = _grad_many(e.child, pts, tol)
        ev = np.exp(v)
        return ev, ev[:, None] * g, t
    if isinstance(e, Log):
        v, g, t = _grad_many(e.child, pts, tol)
        if np.any(v <= 0.0):
            raise ExprDomainError("log argument is non-positive")
        return np.log(v), g / v[:, None], t
    if isinstance(e, Sin):
        v, g, t = _grad_many(e.child, pts, tol)
        return np.sin(v), np.cos(v)[:, None] * g, t
    if isinstance(e, Cos):
        v, g, t = _grad_many(e.child, pts, tol)
        return np.cos(v), -np.sin(v)[:, None] * g, t
    raise TypeError(f"unknown node {e!r}")

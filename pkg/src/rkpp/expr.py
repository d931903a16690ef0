"""Time-dependent coefficient expressions.

A tiny expression language over the single variable ``t``: parse infix text,
evaluate on scalars or numpy arrays, and differentiate exactly.

    >>> e = parse_expr("sech(t/2)^2/(2+2*tanh(t/2))")
    >>> round(float(e(0.0)), 12)
    0.5
    >>> float(differentiate(parse_expr("exp(-2*t)+1"))(0.0))
    -2.0
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

__all__ = [
    "ExprError",
    "ExprSyntaxError",
    "ExprDomainError",
    "Expr",
    "Const",
    "Var",
    "Neg",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Pow",
    "Func",
    "parse_expr",
    "eval_expr",
    "differentiate",
    "to_text",
    "const",
    "T",
    "CoefficientSet",
]

ArrayLike = Union[float, np.ndarray]


class ExprError(Exception):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}" + (f" in {text!r}" if text else ""))


class ExprDomainError(ExprError, ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# AST


class Expr:
    """Base node. Nodes are frozen dataclasses and therefore hashable."""

    def __call__(self, t: ArrayLike) -> ArrayLike:
        return eval_expr(self, t)

    def __add__(self, other):
        return add(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __sub__(self, other):
        return sub(self, _lift(other))

    def __rsub__(self, other):
        return sub(_lift(other), self)

    def __mul__(self, other):
        return mul(self, _lift(other))

    def __rmul__(self, other):
        return mul(_lift(other), self)

    def __truediv__(self, other):
        return div(self, _lift(other))

    def __rtruediv__(self, other):
        return div(_lift(other), self)

    def __pow__(self, other):
        return power(self, _lift(other))

    def __neg__(self):
        return neg(self)

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: float


@dataclass(frozen=True, eq=True)
class Var(Expr):
    name: str = "t"


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, eq=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    base: Expr
    exponent: Expr


@dataclass(frozen=True, eq=True)
class Func(Expr):
    name: str
    arg: Expr


T = Var()

_PRIMITIVES = {
    "exp": np.exp,
    "log": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "abs": np.abs,
    "sign": np.sign,
}


def _lift(x) -> Expr:
    if isinstance(x, Expr):
        return x
    return Const(float(x))


def const(x: float) -> Const:
    return Const(float(x))


def _is_const(e: Expr, value: float | None = None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


# Light constant folding keeps derivative trees from exploding; this is not a
# simplifier.
def add(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    return Sub(a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return Const(0.0)
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 1.0):
        return a
    if _is_const(a, 0.0) and not _is_const(b, 0.0):
        return Const(0.0)
    return Div(a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def power(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 1.0):
        return a
    if _is_const(b, 0.0):
        return Const(1.0)
    return Pow(a, b)


def func(name: str, arg: Expr) -> Expr:
    return Func(name, arg)


# Reciprocal names are sugar over the primitive set.
_SUGAR = {
    "sech": lambda u: div(Const(1.0), Func("cosh", u)),
    "csch": lambda u: div(Const(1.0), Func("sinh", u)),
    "coth": lambda u: div(Func("cosh", u), Func("sinh", u)),
    "sec": lambda u: div(Const(1.0), Func("cos", u)),
    "csc": lambda u: div(Const(1.0), Func("sin", u)),
    "cot": lambda u: div(Func("cos", u), Func("sin", u)),
    "sqrt": lambda u: Pow(u, Const(0.5)),
    "ln": lambda u: Func("log", u),
}

_CONSTANTS = {"pi": math.pi}


# ---------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>\*\*|[-+*/^(),]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        value = m.group(kind)
        start = m.start(kind)
        if kind == "op" and value == "**":
            value = "^"
        tokens.append((kind, value, start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


def _fold(e: Expr) -> Expr:
    # collapse constant-only nodes (substituted parameters) so that, e.g.,
    # t^(n-1) with n = 1 differentiates without a spurious 0/t term
    kids = [getattr(e, n) for n in ("left", "right", "arg", "base", "exponent") if hasattr(e, n)]
    if not kids or not all(isinstance(k, Const) for k in kids):
        return e
    try:
        with np.errstate(all="ignore"):
            v = float(_eval(e, 0.0))
    except (ExprError, ZeroDivisionError, ValueError):
        return e
    return Const(v) if math.isfinite(v) else e


class _Parser:
    def __init__(self, text: str, params: Mapping[str, float]):
        self.text = text
        self.params = params
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.advance()
        if val != value:
            raise ExprSyntaxError(f"expected {value!r}, found {val or 'end of input'!r}", pos, self.text)

    def parse(self) -> Expr:
        e = self.expression()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {val!r}", pos, self.text)
        return e

    def expression(self) -> Expr:
        left = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.advance()[1]
            right = self.term()
            left = _fold(Add(left, right) if op == "+" else Sub(left, right))
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.advance()[1]
            right = self.unary()
            left = _fold(Mul(left, right) if op == "*" else Div(left, right))
        return left

    def unary(self) -> Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.advance()
            return _fold(Neg(self.unary()))
        if kind == "op" and val == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[1] == "^":
            self.advance()
            # right-associative; exponent may carry its own sign
            return _fold(Pow(base, self.unary()))
        return base

    def atom(self) -> Expr:
        kind, val, pos = self.advance()
        if kind == "num":
            return Const(float(val))
        if kind == "op" and val == "(":
            e = self.expression()
            self.expect(")")
            return e
        if kind == "name":
            if self.peek()[1] == "(":
                self.advance()
                arg = self.expression()
                self.expect(")")
                if val in _PRIMITIVES:
                    return Func(val, arg)
                if val in _SUGAR:
                    return _SUGAR[val](arg)
                raise ExprSyntaxError(f"unknown function {val!r}", pos, self.text)
            if val == "t":
                return T
            if val in self.params:
                return Const(float(self.params[val]))
            if val in _CONSTANTS:
                return Const(_CONSTANTS[val])
            raise ExprSyntaxError(f"unknown identifier {val!r}", pos, self.text)
        raise ExprSyntaxError(f"unexpected token {val or 'end of input'!r}", pos, self.text)


def parse_expr(text: str, params: Mapping[str, float] | None = None) -> Expr:
    """Parse ``text`` into an expression tree.

    Names found in ``params`` are substituted as numeric constants, which is
    how catalog families bind their free parameters.
    """
    if not isinstance(text, str):
        return _lift(text)
    return _Parser(text, params or {}).parse()


# ---------------------------------------------------------------------------
# Evaluation


def _check(values, what: str):
    if not np.all(np.isfinite(values)):
        raise ExprDomainError(f"non-finite value from {what}")
    return values


def _eval(e: Expr, t):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return t
    if isinstance(e, Neg):
        return -_eval(e.arg, t)
    if isinstance(e, Add):
        return _eval(e.left, t) + _eval(e.right, t)
    if isinstance(e, Sub):
        return _eval(e.left, t) - _eval(e.right, t)
    if isinstance(e, Mul):
        return _eval(e.left, t) * _eval(e.right, t)
    if isinstance(e, Div):
        den = _eval(e.right, t)
        if np.any(np.asarray(den) == 0.0):
            raise ExprDomainError(f"division by zero in {to_text(e)}")
        return _eval(e.left, t) / den
    if isinstance(e, Pow):
        base = _eval(e.base, t)
        ex = _eval(e.exponent, t)
        b = np.asarray(base)
        x = np.asarray(ex)
        integral = np.all(x == np.round(x))
        if not integral and np.any(b < 0):
            raise ExprDomainError(f"negative base with non-integer exponent in {to_text(e)}")
        if np.any((b == 0) & (x < 0)):
            raise ExprDomainError(f"zero raised to a negative power in {to_text(e)}")
        return _check(np.power(base, ex), to_text(e))
    if isinstance(e, Func):
        arg = _eval(e.arg, t)
        if e.name == "log" and np.any(np.asarray(arg) <= 0):
            raise ExprDomainError(f"log of non-positive value in {to_text(e)}")
        return _check(_PRIMITIVES[e.name](arg), to_text(e))
    raise TypeError(f"not an expression node: {e!r}")


def eval_expr(e: Expr, t: ArrayLike) -> ArrayLike:
    """Evaluate ``e`` at ``t`` (scalar or array).

    Raises :class:`ExprDomainError` rather than returning inf/nan.
    """
    scalar = np.ndim(t) == 0
    tt = float(t) if scalar else np.asarray(t, dtype=float)
    with np.errstate(all="ignore"):
        value = _check(_eval(e, tt), to_text(e))
    if scalar:
        return float(value)
    return np.broadcast_to(np.asarray(value, dtype=float), np.shape(tt)).copy()


# ---------------------------------------------------------------------------
# Differentiation


def differentiate(e: Expr) -> Expr:
    """Exact derivative with respect to ``t``."""
    if isinstance(e, Const):
        return Const(0.0)
    if isinstance(e, Var):
        return Const(1.0)
    if isinstance(e, Neg):
        return neg(differentiate(e.arg))
    if isinstance(e, Add):
        return add(differentiate(e.left), differentiate(e.right))
    if isinstance(e, Sub):
        return sub(differentiate(e.left), differentiate(e.right))
    if isinstance(e, Mul):
        return add(mul(differentiate(e.left), e.right), mul(e.left, differentiate(e.right)))
    if isinstance(e, Div):
        du, dv = differentiate(e.left), differentiate(e.right)
        if _is_const(dv, 0.0):
            return div(du, e.right)
        return div(sub(mul(du, e.right), mul(e.left, dv)), power(e.right, Const(2.0)))
    if isinstance(e, Pow):
        db = differentiate(e.base)
        if isinstance(e.exponent, Const):
            n = e.exponent.value
            return mul(mul(Const(n), power(e.base, Const(n - 1.0))), db)
        dx = differentiate(e.exponent)
        # d(b^x) = b^x (x' log b + x b'/b)
        return mul(e, add(mul(dx, Func("log", e.base)), div(mul(e.exponent, db), e.base)))
    if isinstance(e, Func):
        u = e.arg
        du = differentiate(u)
        if _is_const(du, 0.0):
            return Const(0.0)
        name = e.name
        if name == "exp":
            outer = e
        elif name == "log":
            return div(du, u)
        elif name == "sin":
            outer = Func("cos", u)
        elif name == "cos":
            outer = neg(Func("sin", u))
        elif name == "tan":
            outer = add(Const(1.0), power(Func("tan", u), Const(2.0)))
        elif name == "sinh":
            outer = Func("cosh", u)
        elif name == "cosh":
            outer = Func("sinh", u)
        elif name == "tanh":
            outer = sub(Const(1.0), power(Func("tanh", u), Const(2.0)))
        elif name == "abs":
            outer = Func("sign", u)
        elif name == "sign":
            return Const(0.0)
        else:  # pragma: no cover - guarded by the parser
            raise ExprError(f"no derivative rule for {name}")
        return mul(outer, du)
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# Printing


def to_text(e: Expr) -> str:
    """Fully parenthesised text that :func:`parse_expr` reads back."""
    if isinstance(e, Const):
        return f"({e.value!r})" if e.value < 0 else repr(e.value)
    if isinstance(e, Var):
        return "t"
    if isinstance(e, Neg):
        return f"(-{to_text(e.arg)})"
    if isinstance(e, Func):
        return f"{e.name}({to_text(e.arg)})"
    ops = {Add: "+", Sub: "-", Mul: "*", Div: "/", Pow: "^"}
    for cls, sym in ops.items():
        if isinstance(e, cls):
            left, right = (e.base, e.exponent) if cls is Pow else (e.left, e.right)
            return f"({to_text(left)}{sym}{to_text(right)})"
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# Coefficient bundle


@dataclass(frozen=True)
class CoefficientSet:
    """Coefficients a..g of the variable-coefficient equations.

    ``b`` multiplies the quadratic potential, ``c`` the drift ``x u_x``, ``d``
    the linear growth, ``f`` the linear forcing and ``g`` the constant drift.
    ``c0`` selects the Riccati (0) or Ermakov (1) system; ``r0``, ``h0`` and
    ``p`` are the constants of the reduced model equation.
    """

    a: Expr = Const(1.0)
    b: Expr = Const(0.0)
    c: Expr = Const(0.0)
    d: Expr = Const(0.0)
    f: Expr = Const(0.0)
    g: Expr = Const(0.0)
    c0: int = 0
    r0: float = 0.0
    h0: float = 0.0
    p: float = 1.0

    def __post_init__(self):
        for name in "abcdfg":
            value = getattr(self, name)
            if not isinstance(value, Expr):
                object.__setattr__(self, name, parse_expr(value) if isinstance(value, str) else _lift(value))
        if self.c0 not in (0, 1):
            raise ValueError(f"c0 must be 0 or 1, got {self.c0!r}")
        if not self.p > 0:
            raise ValueError(f"p must be positive, got {self.p!r}")

    @classmethod
    def from_strings(cls, params: Mapping[str, float] | None = None, **fields) -> "CoefficientSet":
        parsed = {}
        for key, value in fields.items():
            if key in ("a", "b", "c", "d", "f", "g") and isinstance(value, str):
                parsed[key] = parse_expr(value, params)
            else:
                parsed[key] = value
        return cls(**parsed)

    def derivative(self, name: str) -> Expr:
        return differentiate(getattr(self, name))

    def check_positive_a(self, t_samples) -> None:
        values = np.asarray(eval_expr(self.a, np.asarray(t_samples, dtype=float)))
        if np.any(values <= 0):
            bad = np.asarray(t_samples, dtype=float)[values <= 0][0]
            raise ValueError(f"a(t) must be positive on the working interval; a({bad:g}) <= 0")

    def replace(self, **changes) -> "CoefficientSet":
        from dataclasses import replace

        return replace(self, **changes)

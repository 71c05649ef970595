"""Closed-form expression language for map components and warp functions.

The grammar is a small, unambiguous recursive-descent language:

    sum     := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ("^" integer)*
    atom    := number | "pi" | variable | parameter | function "(" sum ")"
              | "(" sum ")"

Variables are ``x1 .. xN`` (1-based), exponents are integer literals, there is
no implicit multiplication, and whitespace is insignificant.  Parameters are
free identifiers declared at parse time and bound to numbers at evaluation
time.  See docs/expression-language.md for the full description.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from .autodiff import DomainError, Jet

__all__ = [
    "Expr",
    "ExprError",
    "SyntaxErrorAt",
    "EvalError",
    "FUNCTIONS",
    "parse",
    "unparse",
    "evaluate",
    "eval_value",
    "eval_jet",
    "eval_jet2",
    "variables_used",
]

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "abs")

_FLOAT_FUNCS = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "sqrt": math.sqrt,
    "abs": abs,
}


class ExprError(ValueError):
    """Base class for expression-language failures."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class SyntaxErrorAt(ExprError):
    pass


class EvalError(ExprError):
    pass


@dataclass(frozen=True)
class Num:
    value: float
    pos: int


@dataclass(frozen=True)
class Const:
    name: str
    pos: int


@dataclass(frozen=True)
class Var:
    index: int  # 1-based
    pos: int


@dataclass(frozen=True)
class Param:
    name: str
    pos: int


@dataclass(frozen=True)
class Neg:
    arg: "Expr"
    pos: int


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"
    pos: int


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int
    pos: int


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expr"
    pos: int


Expr = Union[Num, Const, Var, Param, Neg, Bin, Pow, Call]

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)

_VAR_RE = re.compile(r"^x(\d+)$")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise SyntaxErrorAt(f"unexpected character {stripped[0]!r}", len(text) - len(stripped))
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "ident":
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, n_vars: int, params):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.n_vars = n_vars
        self.params = frozenset(params)

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, symbol: str):
        kind, value, pos = self.peek()
        if kind != "op" or value != symbol:
            raise SyntaxErrorAt(f"expected {symbol!r}", pos)
        return self.advance()

    def parse(self) -> Expr:
        node = self.sum()
        kind, value, pos = self.peek()
        if kind != "end":
            raise SyntaxErrorAt(f"unexpected trailing input {value!r}", pos)
        return node

    def sum(self) -> Expr:
        node = self.term()
        while True:
            kind, value, pos = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                node = Bin(value, node, self.term(), pos)
            else:
                return node

    def term(self) -> Expr:
        node = self.unary()
        while True:
            kind, value, pos = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                node = Bin(value, node, self.unary(), pos)
            else:
                return node

    def unary(self) -> Expr:
        kind, value, pos = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return Neg(self.unary(), pos)
        return self.power()

    def power(self) -> Expr:
        node = self.atom()
        while True:
            kind, value, pos = self.peek()
            if kind == "op" and value == "^":
                self.advance()
                node = Pow(node, self._exponent(), pos)
            else:
                return node

    def _exponent(self) -> int:
        sign = 1
        kind, value, pos = self.peek()
        if kind == "op" and value == "-":
            sign = -1
            self.advance()
            kind, value, pos = self.peek()
        if kind != "num":
            raise SyntaxErrorAt("exponent must be an integer literal", pos)
        if not value.isdigit():
            raise SyntaxErrorAt("exponent must be an integer literal", pos)
        self.advance()
        return sign * int(value)

    def atom(self) -> Expr:
        kind, value, pos = self.advance()
        if kind == "num":
            return Num(float(value), pos)
        if kind == "op" and value == "(":
            node = self.sum()
            self.expect_op(")")
            return node
        if kind == "ident":
            if value in FUNCTIONS:
                self.expect_op("(")
                arg = self.sum()
                self.expect_op(")")
                return Call(value, arg, pos)
            if value == "pi":
                return Const("pi", pos)
            m = _VAR_RE.match(value)
            if m:
                index = int(m.group(1))
                if not 1 <= index <= self.n_vars:
                    raise SyntaxErrorAt(
                        f"variable {value} out of range for dimension {self.n_vars}", pos
                    )
                return Var(index, pos)
            if value in self.params:
                return Param(value, pos)
            raise SyntaxErrorAt(f"unknown identifier {value!r}", pos)
        raise SyntaxErrorAt(f"unexpected token {value!r}" if value else "unexpected end of input", pos)


def parse(text: str, n_vars: int, params: Sequence[str] = ()) -> Expr:
    """Parse ``text`` into an expression over ``x1 .. x{n_vars}``.

    ``params`` lists identifiers that may appear as named constants; any other
    identifier is rejected with its byte offset.
    """
    if not text or not text.strip():
        raise SyntaxErrorAt("empty expression", 0)
    if n_vars < 0:
        raise ValueError("n_vars must be non-negative")
    return _Parser(text, n_vars, params).parse()


# ---- printing --------------------------------------------------------------

_LEVEL_SUM, _LEVEL_TERM, _LEVEL_UNARY, _LEVEL_POW, _LEVEL_ATOM = 1, 2, 3, 4, 5


def _fmt(value: float) -> str:
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _unparse(e: Expr, context: int) -> str:
    if isinstance(e, Num):
        # A negative literal reparses through the unary-minus rule.
        text = _fmt(e.value)
        level = _LEVEL_UNARY if e.value < 0 else _LEVEL_ATOM
    elif isinstance(e, Const):
        text, level = e.name, _LEVEL_ATOM
    elif isinstance(e, Var):
        text, level = f"x{e.index}", _LEVEL_ATOM
    elif isinstance(e, Param):
        text, level = e.name, _LEVEL_ATOM
    elif isinstance(e, Neg):
        text, level = "-" + _unparse(e.arg, _LEVEL_UNARY), _LEVEL_UNARY
    elif isinstance(e, Bin):
        level = _LEVEL_SUM if e.op in "+-" else _LEVEL_TERM
        text = _unparse(e.left, level) + e.op + _unparse(e.right, level + 1)
    elif isinstance(e, Pow):
        text = _unparse(e.base, _LEVEL_ATOM) + "^" + str(e.exponent)
        level = _LEVEL_POW
    elif isinstance(e, Call):
        text, level = f"{e.fn}({_unparse(e.arg, _LEVEL_SUM)})", _LEVEL_ATOM
    else:  # pragma: no cover
        raise TypeError(f"not an expression node: {e!r}")
    if level < context:
        return "(" + text + ")"
    return text


def unparse(e: Expr) -> str:
    """Render an expression to text that reparses to an equivalent tree."""
    return _unparse(e, _LEVEL_SUM)


# ---- evaluation ------------------------------------------------------------


def evaluate(e: Expr, xs: Sequence, params: Mapping[str, float]):
    """Evaluate over any scalar ring (floats or jets indexed like ``xs``)."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Const):
        return math.pi
    if isinstance(e, Var):
        return xs[e.index - 1]
    if isinstance(e, Param):
        try:
            return float(params[e.name])
        except KeyError:
            raise EvalError(f"unbound parameter {e.name!r}", e.pos) from None
    if isinstance(e, Neg):
        return -evaluate(e.arg, xs, params)
    if isinstance(e, Bin):
        lhs = evaluate(e.left, xs, params)
        rhs = evaluate(e.right, xs, params)
        try:
            if e.op == "+":
                return lhs + rhs
            if e.op == "-":
                return lhs - rhs
            if e.op == "*":
                return lhs * rhs
            if not isinstance(rhs, Jet) and rhs == 0:
                raise DomainError("division by zero")
            return lhs / rhs
        except (ZeroDivisionError, DomainError) as exc:
            raise EvalError(str(exc) or "division by zero", e.pos) from None
    if isinstance(e, Pow):
        base = evaluate(e.base, xs, params)
        try:
            if isinstance(base, Jet):
                return base**e.exponent
            return float(base**e.exponent)
        except (ZeroDivisionError, DomainError) as exc:
            raise EvalError(str(exc) or "zero raised to a negative power", e.pos) from None
    if isinstance(e, Call):
        arg = evaluate(e.arg, xs, params)
        try:
            if isinstance(arg, Jet):
                return getattr(arg, e.fn)()
            if e.fn == "log":
                if arg <= 0.0:
                    raise DomainError("log of a non-positive value")
                return math.log(arg)
            return _FLOAT_FUNCS[e.fn](arg)
        except (ValueError, DomainError) as exc:
            raise EvalError(str(exc), e.pos) from None
    raise TypeError(f"not an expression node: {e!r}")  # pragma: no cover


def eval_value(e: Expr, point: Sequence[float], params: Mapping[str, float] | None = None) -> float:
    return float(evaluate(e, [float(x) for x in point], params or {}))


def eval_jet(
    e: Expr,
    point: Sequence[float],
    params: Mapping[str, float] | None = None,
    order: int = 2,
) -> Jet:
    n = len(point)
    xs = [Jet.variable(float(point[i]), i, n, order) for i in range(n)]
    out = evaluate(e, xs, params or {})
    if not isinstance(out, Jet):
        out = Jet.constant(float(out), n, order)
    return out


def eval_jet2(e: Expr, point: Sequence[float], params: Mapping[str, float] | None = None) -> Jet:
    """Value, gradient and Hessian of ``e`` at ``point``, exact to rounding."""
    return eval_jet(e, point, params, order=2)


def variables_used(e: Expr) -> set[int]:
    """1-based indices of the variables appearing in ``e``."""
    if isinstance(e, Var):
        return {e.index}
    if isinstance(e, Neg):
        return variables_used(e.arg)
    if isinstance(e, Bin):
        return variables_used(e.left) | variables_used(e.right)
    if isinstance(e, Pow):
        return variables_used(e.base)
    if isinstance(e, Call):
        return variables_used(e.arg)
    return set()

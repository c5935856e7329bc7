"""Parser, evaluator and symbolic differentiator for chart expressions.

The metric data a_ij(x) and b_i(x) are supplied as strings over the base
coordinates x1..xn with ``+ - * / ^``, unary minus and the functions
``sin cos exp sqrt``.  ``^`` binds tightest, is right-associative, and its
exponent must fold to a constant.  Evaluation is generic: the environment
may hold floats or jet ``Series`` values, so the same AST feeds both plain
arithmetic and the differentiation engine.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence, Union

from .errors import ArgumentError, EvaluationError, ParseError
from .jets import Series


@dataclass(frozen=True)
class Lit:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 0-based; written x{index+1}


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str  # one of sin cos exp sqrt
    arg: "Expr"


Expr = Union[Lit, Var, Neg, Bin, Call]

_FUNCTIONS = ("sin", "cos", "exp", "sqrt")

_TOKEN_RE = re.compile(
    r"(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)

_VAR_RE = re.compile(r"^x([1-9][0-9]*)$")


@dataclass(frozen=True)
class _Token:
    kind: str  # num | ident | op | end
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup or "op"
        tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, dim: int):
        self.tokens = _tokenize(text)
        self.dim = dim
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect_op(self, op: str) -> _Token:
        t = self.peek()
        if t.kind != "op" or t.text != op:
            raise ParseError(f"expected {op!r}", t.pos)
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        t = self.peek()
        if t.kind != "end":
            raise ParseError(f"unexpected token {t.text!r}", t.pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            e = Bin(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            e = Bin(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        t = self.peek()
        if t.kind == "op" and t.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        t = self.peek()
        if t.kind == "op" and t.text == "^":
            self.advance()
            exponent = fold(self.unary())
            if not isinstance(exponent, Lit):
                raise ParseError("exponent must fold to a constant", t.pos)
            return Bin("^", base, exponent)
        return base

    def atom(self) -> Expr:
        t = self.advance()
        if t.kind == "num":
            return Lit(float(t.text))
        if t.kind == "ident":
            m = _VAR_RE.match(t.text)
            if m:
                idx = int(m.group(1))
                if idx > self.dim:
                    raise ParseError(
                        f"variable x{idx} exceeds chart dimension {self.dim}", t.pos
                    )
                return Var(idx - 1)
            if t.text in _FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(t.text, arg)
            raise ParseError(f"unknown identifier {t.text!r}", t.pos)
        if t.kind == "op" and t.text == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ParseError("expected a value", t.pos)


def parse(text: str, dim: int) -> Expr:
    """Parse ``text`` into an Expr whose variables all fit in ``dim``."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    return _Parser(text, dim).parse()


# -- evaluation --------------------------------------------------------------


def _apply_fn(fn: str, v):
    if isinstance(v, Series):
        return getattr(v, fn)()
    v = float(v)
    if fn == "sqrt":
        if v < 0:
            raise EvaluationError(f"sqrt of negative value {v}")
        return math.sqrt(v)
    if fn == "exp":
        return math.exp(v)
    return getattr(math, fn)(v)


def _pow(base, p: float):
    if isinstance(base, Series):
        return base**p
    base = float(base)
    if p == int(p):
        if base == 0.0 and p < 0:
            raise EvaluationError("zero raised to a negative power")
        return base ** int(p)
    if base < 0:
        raise EvaluationError(f"negative base {base} with non-integer exponent {p}")
    if base == 0.0 and p < 0:
        raise EvaluationError("zero raised to a negative power")
    return base**p


def evaluate(e: Expr, env: Sequence):
    """Evaluate generically; env entries are floats or Series."""
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        if e.index >= len(env):
            raise ArgumentError(
                f"expression uses x{e.index + 1} but only {len(env)} values supplied"
            )
        return env[e.index]
    if isinstance(e, Neg):
        return -evaluate(e.operand, env)
    if isinstance(e, Call):
        return _apply_fn(e.fn, evaluate(e.arg, env))
    l = evaluate(e.left, env)
    if e.op == "^":
        return _pow(l, e.right.value)  # exponent is a folded Lit
    r = evaluate(e.right, env)
    if e.op == "+":
        return l + r
    if e.op == "-":
        return l - r
    if e.op == "*":
        return l * r
    # division
    if not isinstance(r, Series) and float(r) == 0.0:
        raise EvaluationError("division by zero")
    return l / r


def eval_expr(e: Expr, env: Sequence[float]) -> float:
    """IEEE-double value of the expression at the given base coordinates."""
    v = evaluate(e, [float(x) for x in env])
    return float(v)


# -- constant folding and symbolic differentiation ---------------------------


def fold(e: Expr) -> Expr:
    """Fold constant subtrees; errors (e.g. 1/0) are left for evaluation."""
    if isinstance(e, (Lit, Var)):
        return e
    if isinstance(e, Neg):
        o = fold(e.operand)
        if isinstance(o, Lit):
            return Lit(-o.value)
        return Neg(o)
    if isinstance(e, Call):
        a = fold(e.arg)
        if isinstance(a, Lit):
            try:
                return Lit(float(_apply_fn(e.fn, a.value)))
            except EvaluationError:
                pass
        return Call(e.fn, a)
    l, r = fold(e.left), fold(e.right)
    if isinstance(l, Lit) and isinstance(r, Lit):
        try:
            return Lit(float(evaluate(Bin(e.op, l, r), [])))
        except EvaluationError:
            pass
    return Bin(e.op, l, r)


def _is_lit(e: Expr, v: float) -> bool:
    return isinstance(e, Lit) and e.value == v


def _add(a: Expr, b: Expr) -> Expr:
    if _is_lit(a, 0.0):
        return b
    if _is_lit(b, 0.0):
        return a
    if isinstance(a, Lit) and isinstance(b, Lit):
        return Lit(a.value + b.value)
    return Bin("+", a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if _is_lit(b, 0.0):
        return a
    if isinstance(a, Lit) and isinstance(b, Lit):
        return Lit(a.value - b.value)
    if _is_lit(a, 0.0):
        return _neg(b)
    return Bin("-", a, b)


def _neg(a: Expr) -> Expr:
    if isinstance(a, Lit):
        return Lit(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def _mul(a: Expr, b: Expr) -> Expr:
    if _is_lit(a, 0.0) or _is_lit(b, 0.0):
        return Lit(0.0)
    if _is_lit(a, 1.0):
        return b
    if _is_lit(b, 1.0):
        return a
    if isinstance(a, Lit) and isinstance(b, Lit):
        return Lit(a.value * b.value)
    return Bin("*", a, b)


def _div(a: Expr, b: Expr) -> Expr:
    if _is_lit(a, 0.0):
        return Lit(0.0)
    if _is_lit(b, 1.0):
        return a
    return Bin("/", a, b)


def _pow_expr(a: Expr, p: float) -> Expr:
    if p == 0:
        return Lit(1.0)
    if p == 1:
        return a
    return Bin("^", a, Lit(p))


def diff_expr(e: Expr, var: int) -> Expr:
    """Symbolic d(e)/d(x_{var+1}); simplification is constant folding only."""
    if isinstance(e, Lit):
        return Lit(0.0)
    if isinstance(e, Var):
        return Lit(1.0 if e.index == var else 0.0)
    if isinstance(e, Neg):
        return _neg(diff_expr(e.operand, var))
    if isinstance(e, Call):
        du = diff_expr(e.arg, var)
        if e.fn == "sin":
            return _mul(Call("cos", e.arg), du)
        if e.fn == "cos":
            return _neg(_mul(Call("sin", e.arg), du))
        if e.fn == "exp":
            return _mul(Call("exp", e.arg), du)
        # sqrt
        return _div(du, _mul(Lit(2.0), Call("sqrt", e.arg)))
    if e.op == "+":
        return _add(diff_expr(e.left, var), diff_expr(e.right, var))
    if e.op == "-":
        return _sub(diff_expr(e.left, var), diff_expr(e.right, var))
    if e.op == "*":
        return _add(
            _mul(diff_expr(e.left, var), e.right), _mul(e.left, diff_expr(e.right, var))
        )
    if e.op == "/":
        num = _sub(
            _mul(diff_expr(e.left, var), e.right), _mul(e.left, diff_expr(e.right, var))
        )
        return _div(num, _pow_expr(e.right, 2.0))
    # power with constant exponent
    p = e.right.value
    return _mul(_mul(Lit(p), _pow_expr(e.left, p - 1.0)), diff_expr(e.left, var))


# -- printing ----------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def to_text(e: Expr) -> str:
    """Render ``e`` so that parse(to_text(e)) evaluates identically."""

    def go(e: Expr, parent_prec: int) -> str:
        if isinstance(e, Lit):
            if e.value < 0:
                s = f"-{-e.value!r}"
                return f"({s})" if parent_prec > _PREC["neg"] else s
            return repr(e.value)
        if isinstance(e, Var):
            return f"x{e.index + 1}"
        if isinstance(e, Neg):
            s = f"-{go(e.operand, _PREC['neg'])}"
            return f"({s})" if parent_prec > _PREC["neg"] else s
        if isinstance(e, Call):
            return f"{e.fn}({go(e.arg, 0)})"
        p = _PREC[e.op]
        left = go(e.left, p if e.op != "^" else p + 1)
        right = go(e.right, p + 1 if e.op in "+-*/" else p)
        s = f"{left} {e.op} {right}" if e.op != "^" else f"{left}^{right}"
        return f"({s})" if p < parent_prec else s

    return go(e, 0)

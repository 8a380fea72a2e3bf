"""Recursive-descent parser for the jet expression grammar.

Grammar (whitespace insignificant)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?
    atom   := INT | '(' expr ')' | variable
    variable :=
        'x' INT                              base coordinate
      | 'u' [INT] ['[' [ints] ']']           jet u^alpha_I (alpha defaults to 1)
      | 'p' [INT] '[' [ints] ';' INT ']'     momentum p_alpha^{I.i}
      | NAME ['[' ints ']'] '(' 'x' ')'      opaque function / derivative
      | NAME                                 parameter

Exponents must evaluate to non-negative integers; divisors must be
nonzero constants.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

from .core import (
    Base,
    Expr,
    FuncDeriv,
    Jet,
    Momentum,
    MissingBindingError,
    Param,
    as_expr,
)

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")
_JET_NAME = re.compile(r"u(\d*)$")
_MOM_NAME = re.compile(r"p(\d*)$")
_BASE_NAME = re.compile(r"x(\d+)$")


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, column: int, text: str = ""):
        super().__init__(f"syntax error at column {column}: {message}")
        self.column = column
        self.text = text


class UnknownVariableError(ValueError):
    pass


@dataclass(frozen=True)
class ParseContext:
    """Declared dimensions used to validate variables while parsing.

    ``None`` for any bound disables that check.
    """

    n: Optional[int] = None
    m: Optional[int] = None
    max_order: Optional[int] = None
    momentum_order: Optional[int] = None
    params: Optional[frozenset] = None
    functions: Optional[frozenset] = None


# -- parse tree -------------------------------------------------------------

class Node:
    def to_expr(self) -> Expr:
        raise NotImplementedError

    def evaluate(self, point: Mapping):
        raise NotImplementedError


@dataclass(frozen=True)
class Num(Node):
    value: int

    def to_expr(self):
        return Expr(self.value)

    def evaluate(self, point):
        return Fraction(self.value)


@dataclass(frozen=True)
class Sym(Node):
    var: object

    def to_expr(self):
        return Expr(self.var)

    def evaluate(self, point):
        if self.var not in point:
            raise MissingBindingError(f"no value bound for {self.var}")
        return point[self.var]


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    def to_expr(self):
        a, b = self.left.to_expr(), self.right.to_expr()
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            return a / b
        return a ** _exponent(b)

    def evaluate(self, point):
        a, b = self.left.evaluate(point), self.right.evaluate(point)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            if b == 0:
                raise ZeroDivisionError("division by zero")
            return a / b
        return a ** _exponent(self.right.to_expr())


@dataclass(frozen=True)
class Neg(Node):
    arg: Node

    def to_expr(self):
        return -self.arg.to_expr()

    def evaluate(self, point):
        return -self.arg.evaluate(point)


def _exponent(e: Expr) -> int:
    if not e.is_constant():
        raise ValueError("exponent must be a constant integer")
    k = e.constant_value()
    if k.denominator != 1 or k < 0:
        raise ValueError(f"exponent must be a non-negative integer, got {k}")
    return int(k)


# -- parser -----------------------------------------------------------------

class _Parser:
    def __init__(self, text: str, ctx: ParseContext):
        self.text = text
        self.ctx = ctx
        self.tokens = []  # (kind, value, column)
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                break
            if m.group(0).strip() == "":
                break
            col = m.start(m.lastindex) + 1
            if m.group(1) is not None:
                self.tokens.append(("int", m.group(1), col))
            elif m.group(2) is not None:
                self.tokens.append(("name", m.group(2), col))
            else:
                self.tokens.append(("sym", m.group(3), col))
            pos = m.end()
        self.end_col = len(text) + 1
        self.i = 0

    # token helpers
    def peek(self, value: Optional[str] = None):
        if self.i >= len(self.tokens):
            return None
        tok = self.tokens[self.i]
        if value is not None and tok[1] != value:
            return None
        return tok

    def column(self) -> int:
        return self.tokens[self.i][2] if self.i < len(self.tokens) else self.end_col

    def error(self, message: str, column: Optional[int] = None):
        raise ExprSyntaxError(message, column if column is not None else self.column(), self.text)

    def take(self, value: Optional[str] = None, kind: Optional[str] = None):
        tok = self.peek()
        if tok is None:
            self.error(f"expected {value or kind}, found end of input")
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            self.error(f"expected {value or kind}, found {tok[1]!r}")
        self.i += 1
        return tok

    # grammar
    def parse(self) -> Node:
        if not self.tokens:
            self.error("empty expression")
        node = self.expr()
        if self.peek() is not None:
            self.error(f"unexpected {self.peek()[1]!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek("+") or self.peek("-"):
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek("*") or self.peek("/"):
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek("-"):
            self.take()
            return Neg(self.unary())
        if self.peek("+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek("^"):
            self.take()
            col = self.column()
            exponent = self.unary()
            try:
                _exponent(exponent.to_expr())
            except ValueError as exc:
                self.error(str(exc), col)
            return BinOp("^", base, exponent)
        return base

    def atom(self) -> Node:
        tok = self.peek()
        if tok is None:
            self.error("unexpected end of input")
        kind, value, col = tok
        if kind == "int":
            self.take()
            return Num(int(value))
        if value == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        if kind == "name":
            self.take()
            return Sym(self.variable(value, col))
        self.error(f"unexpected {value!r}")

    def int_list(self, stop: tuple[str, ...]) -> tuple[int, ...]:
        out = []
        if self.peek() is not None and self.peek()[1] in stop:
            return ()
        while True:
            out.append(int(self.take(kind="int")[1]))
            if self.peek(","):
                self.take()
                continue
            return tuple(out)

    def _check_base(self, entries, col):
        n = self.ctx.n
        if n is None:
            return
        for e in entries:
            if not 1 <= e <= n:
                raise UnknownVariableError(f"column {col}: base index {e} out of range 1..{n}")

    def _check_alpha(self, alpha, col):
        m = self.ctx.m
        if m is not None and not 1 <= alpha <= m:
            raise UnknownVariableError(f"column {col}: fiber index {alpha} out of range 1..{m}")

    def variable(self, name: str, col: int):
        ctx = self.ctx
        bm = _BASE_NAME.match(name)
        if bm:
            i = int(bm.group(1))
            self._check_base((i,), col)
            return Base(i)
        jm = _JET_NAME.match(name)
        if jm:
            alpha = int(jm.group(1) or 1)
            index: tuple[int, ...] = ()
            if self.peek("["):
                self.take()
                index = self.int_list(("]",))
                self.take("]")
            self._check_alpha(alpha, col)
            self._check_base(index, col)
            if ctx.max_order is not None and len(index) > ctx.max_order:
                raise UnknownVariableError(
                    f"column {col}: jet of order {len(index)} exceeds declared order {ctx.max_order}")
            return Jet(alpha, index)
        mm = _MOM_NAME.match(name)
        if mm:
            alpha = int(mm.group(1) or 1)
            self.take("[")
            index = self.int_list((";",))
            self.take(";")
            direction = int(self.take(kind="int")[1])
            self.take("]")
            self._check_alpha(alpha, col)
            self._check_base(index + (direction,), col)
            if ctx.momentum_order is not None and len(index) > ctx.momentum_order:
                raise UnknownVariableError(
                    f"column {col}: momentum index of length {len(index)} exceeds {ctx.momentum_order}")
            return Momentum(alpha, index, direction)
        if self.peek("[") or self.peek("("):
            index = ()
            if self.peek("["):
                self.take()
                index = self.int_list(("]",))
                self.take("]")
            self.take("(")
            arg = self.take(kind="name")
            if arg[1] != "x":
                self.error("opaque functions take the single argument 'x'", arg[2])
            self.take(")")
            self._check_base(index, col)
            if ctx.functions is not None and name not in ctx.functions:
                raise UnknownVariableError(f"column {col}: unknown function {name!r}")
            return FuncDeriv(name, index)
        if ctx.params is not None and name not in ctx.params:
            raise UnknownVariableError(f"column {col}: unknown variable {name!r}")
        return Param(name)


def parse_tree(text: str, ctx: Optional[ParseContext] = None) -> Node:
    """Parse without normalizing; the tree can be evaluated directly."""
    return _Parser(text, ctx or ParseContext()).parse()


def parse(text: str, ctx: Optional[ParseContext] = None) -> Expr:
    tree = parse_tree(text, ctx)
    try:
        return as_expr(tree.to_expr())
    except ZeroDivisionError as exc:
        raise ExprSyntaxError(str(exc), 1, text) from exc

"""A small arithmetic expression language in one variable ``x``.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | "x" | "pi" | "e" | FUNC "(" expr ")" | "(" expr ")"

with FUNC one of exp, ln, sqrt, abs, sin, cos, sinh, cosh.  ``^`` binds
tighter than unary minus and associates to the right, so ``-x^2`` is
``-(x^2)`` and ``2^3^2`` is ``2^9``.

Parsed expressions evaluate elementwise on numpy arrays.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ExpressionEvaluationError, ParseError, UnknownIdentifier

__all__ = ["Node", "Num", "Var", "Unary", "Binary", "Call", "parse", "evaluate"]

FUNCTIONS = {
    "exp": np.exp,
    "ln": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "sin": np.sin,
    "cos": np.cos,
    "sinh": np.sinh,
    "cosh": np.cosh,
}
CONSTANTS = {"pi": math.pi, "e": math.e}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


class Node:
    def __call__(self, x):
        return evaluate(self, x)

    @property
    def has_x(self) -> bool:
        return False


@dataclass(frozen=True)
class Num(Node):
    value: float

    def __str__(self):
        return repr(self.value)


@dataclass(frozen=True)
class Var(Node):
    @property
    def has_x(self):
        return True

    def __str__(self):
        return "x"


@dataclass(frozen=True)
class Unary(Node):
    operand: Node

    @property
    def has_x(self):
        return self.operand.has_x

    def __str__(self):
        return f"(-{self.operand})"


@dataclass(frozen=True)
class Binary(Node):
    op: str
    left: Node
    right: Node

    @property
    def has_x(self):
        return self.left.has_x or self.right.has_x

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Call(Node):
    name: str
    arg: Node

    @property
    def has_x(self):
        return self.arg.has_x

    def __str__(self):
        return f"{self.name}({self.arg})"


def _tokenize(text):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[start]!r}", start)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def accept(self, value):
        if self.tok[0] == "op" and self.tok[1] == value:
            self.i += 1
            return True
        return False

    def expect(self, value):
        if not self.accept(value):
            kind, text, pos = self.tok
            found = "end of input" if kind == "end" else repr(text)
            raise ParseError(f"expected {value!r}, found {found}", pos)

    def parse(self):
        node = self.expr()
        kind, text, pos = self.tok
        if kind != "end":
            raise ParseError(f"unexpected {text!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.tok[1]
            self.i += 1
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.tok[1]
            self.i += 1
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        if self.accept("-"):
            return Unary(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.accept("^"):
            return Binary("^", base, self.unary())
        return base

    def atom(self):
        kind, text, pos = self.tok
        if kind == "num":
            self.i += 1
            return Num(float(text))
        if kind == "name":
            self.i += 1
            if text == "x":
                return Var()
            if text in CONSTANTS:
                return Num(CONSTANTS[text])
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            raise UnknownIdentifier(f"unknown identifier {text!r}", pos)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"expected a number, name or '(', found {found}", pos)


def parse(text: str) -> Node:
    """Parse ``text`` into an expression tree."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    return _Parser(text).parse()


def _power(a, b):
    b_int = np.all(np.equal(np.mod(b, 1.0), 0.0))
    if b_int:
        return np.power(a, b)
    if np.any(np.asarray(a) <= 0):
        raise ExpressionEvaluationError("a^b requires a > 0 when b is not an integer")
    return np.power(a, b)


def evaluate(node: Node, x):
    """Evaluate an expression tree at ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        out = _eval(node, x)
    out = np.broadcast_to(out, x.shape).astype(float, copy=True)
    if not np.all(np.isfinite(out)):
        raise ExpressionEvaluationError(f"non-finite value evaluating {node}")
    return out if out.ndim else float(out)


def _eval(node, x):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Unary):
        return -_eval(node.operand, x)
    if isinstance(node, Call):
        return FUNCTIONS[node.name](_eval(node.arg, x))
    a = _eval(node.left, x)
    b = _eval(node.right, x)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return np.divide(a, b)
    return _power(a, b)

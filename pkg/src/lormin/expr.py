"""Tiny expression language for scalar functions of (u, v).

Grammar (loosest to tightest binding)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right-associative
    atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

Identifiers are the variables ``u`` and ``v``, the constants ``pi`` and
``e``, declared parameter names, or one of the function names in
:data:`FUNCTIONS`. Trees are immutable; evaluation is vectorised over numpy
arrays and never mutates state, so parsed expressions are safe to share
between threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

import numpy as np

from .errors import ExpressionSyntaxError, UnknownIdentifierError

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "exp": np.exp,
    "ln": np.log,
    "abs": np.abs,
    "sqrt": np.sqrt,
}

CONSTANTS = {"pi": math.pi, "e": math.e}

VARIABLES = ("u", "v")


@dataclass(frozen=True)
class Literal:
    value: float


@dataclass(frozen=True)
class Constant:
    name: str  # 'pi' or 'e'


@dataclass(frozen=True)
class Variable:
    name: str  # 'u' or 'v'


@dataclass(frozen=True)
class Parameter:
    name: str


@dataclass(frozen=True)
class Negate:
    operand: "Expression"


@dataclass(frozen=True)
class Binary:
    op: str  # one of + - * / ^
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expression"


Expression = Union[Literal, Constant, Variable, Parameter, Negate, Binary, Call]


# --- parsing -----------------------------------------------------------------

class _Parser:
    def __init__(self, text: str, parameters: frozenset):
        self.text = text
        self.pos = 0
        self.parameters = parameters

    def error(self, message: str) -> ExpressionSyntaxError:
        return ExpressionSyntaxError(message, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str):
        if self.peek() != ch:
            raise self.error(f"expected '{ch}'")
        self.pos += 1

    def parse(self) -> Expression:
        node = self.expr()
        if self.peek() != "":
            raise self.error(f"unexpected trailing input '{self.text[self.pos:]}'")
        return node

    def expr(self) -> Expression:
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expression:
        node = self.unary()
        while self.peek() in ("*", "/"):
            op = self.text[self.pos]
            self.pos += 1
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Expression:
        if self.peek() == "-":
            self.pos += 1
            return Negate(self.unary())
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            return Binary("^", base, self.unary())
        return base

    def atom(self) -> Expression:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            node = self.expr()
            self.take(")")
            return node
        if ch.isdigit() or ch == ".":
            return self.number()
        if ch.isalpha() or ch == "_":
            return self.identifier()
        if ch == "":
            raise self.error("unexpected end of expression")
        raise self.error(f"unexpected character '{ch}'")

    def number(self) -> Literal:
        start = self.pos
        text = self.text
        while self.pos < len(text) and (text[self.pos].isdigit() or text[self.pos] == "."):
            self.pos += 1
        if self.pos < len(text) and text[self.pos] in "eE":
            mark = self.pos
            self.pos += 1
            if self.pos < len(text) and text[self.pos] in "+-":
                self.pos += 1
            if self.pos < len(text) and text[self.pos].isdigit():
                while self.pos < len(text) and text[self.pos].isdigit():
                    self.pos += 1
            else:  # not an exponent after all ('2e' could start identifier 'e')
                self.pos = mark
        try:
            return Literal(float(text[start:self.pos]))
        except ValueError:
            self.pos = start
            raise self.error(f"invalid number '{text[start:self.pos + 1]}'") from None

    def identifier(self) -> Expression:
        start = self.pos
        text = self.text
        while self.pos < len(text) and (text[self.pos].isalnum() or text[self.pos] == "_"):
            self.pos += 1
        name = text[start:self.pos]
        if name in FUNCTIONS:
            if self.peek() != "(":
                self.pos = start
                raise self.error(f"function '{name}' must be applied with parentheses")
            self.pos += 1
            arg = self.expr()
            self.take(")")
            return Call(name, arg)
        if name in VARIABLES:
            return Variable(name)
        if name in CONSTANTS:
            return Constant(name)
        if name in self.parameters:
            return Parameter(name)
        self.pos = start
        raise UnknownIdentifierError(name, start)


def parse(text: str, parameters: Iterable[str] = ()) -> Expression:
    """Parse expression text into a tree.

    ``parameters`` declares extra identifier names (bound to values later at
    field construction). Raises :class:`ExpressionSyntaxError` with the
    offending position, or :class:`UnknownIdentifierError` naming an
    undeclared identifier.
    """
    return _Parser(text, frozenset(parameters)).parse()


# --- evaluation ---------------------------------------------------------------

def evaluate(node: Expression, u, v, parameters: Mapping[str, float] | None = None):
    """Evaluate a tree at (u, v); numpy arrays broadcast elementwise.

    Invalid operations (negative-base fractional powers, log of a negative
    number, division by zero) yield NaN/inf silently here; callers decide
    whether non-finite values are an error.
    """
    p = parameters or {}
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        return _eval(node, u, v, p)


def _eval(node, u, v, p):
    if isinstance(node, Literal):
        return node.value
    if isinstance(node, Constant):
        return CONSTANTS[node.name]
    if isinstance(node, Variable):
        return u if node.name == "u" else v
    if isinstance(node, Parameter):
        return p[node.name]
    if isinstance(node, Negate):
        return -_eval(node.operand, u, v, p)
    if isinstance(node, Call):
        return FUNCTIONS[node.func](_eval(node.arg, u, v, p))
    if isinstance(node, Binary):
        a = _eval(node.left, u, v, p)
        b = _eval(node.right, u, v, p)
        if node.op == "+":
            return np.add(a, b)
        if node.op == "-":
            return np.subtract(a, b)
        if node.op == "*":
            return np.multiply(a, b)
        if node.op == "/":
            return np.divide(a, b)
        return np.power(a, b)
    raise TypeError(f"not an expression node: {node!r}")


# --- pretty printing ----------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(node) -> int:
    if isinstance(node, Binary):
        if node.op in "+-":
            return _PREC_ADD
        if node.op in "*/":
            return _PREC_MUL
        return _PREC_POW
    if isinstance(node, Negate):
        return _PREC_UNARY
    return _PREC_ATOM


def to_text(node: Expression) -> str:
    """Render a tree back to parseable text (parse . to_text is the identity up to evaluation)."""
    if isinstance(node, Literal):
        return repr(node.value)
    if isinstance(node, (Constant, Variable, Parameter)):
        return node.name
    if isinstance(node, Negate):
        inner_text = to_text(node.operand)
        if _prec(node.operand) < _PREC_UNARY:
            inner_text = f"({inner_text})"
        return f"-{inner_text}"
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Binary):
        lt, rt = to_text(node.left), to_text(node.right)
        if node.op == "^":
            # right-associative and binds above unary minus
            if _prec(node.left) <= _PREC_POW:
                lt = f"({lt})"
            if _prec(node.right) < _PREC_UNARY:
                rt = f"({rt})"
        else:
            mine = _PREC_ADD if node.op in "+-" else _PREC_MUL
            if _prec(node.left) < mine:
                lt = f"({lt})"
            if _prec(node.right) <= mine:
                rt = f"({rt})"
        return f"{lt} {node.op} {rt}" if node.op in "+-" else f"{lt}{node.op}{rt}"
    raise TypeError(f"not an expression node: {node!r}")


def free_parameters(node: Expression) -> frozenset:
    """Names of parameters referenced by the tree."""
    if isinstance(node, Parameter):
        return frozenset([node.name])
    if isinstance(node, Negate):
        return free_parameters(node.operand)
    if isinstance(node, Call):
        return free_parameters(node.arg)
    if isinstance(node, Binary):
        return free_parameters(node.left) | free_parameters(node.right)
    return frozenset()

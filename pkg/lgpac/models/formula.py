"""
Formulas of t and x

A small recursive descent parser for the closed-form expressions used by
constants, input bindings and expected values:

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | NAME | NAME "(" expr ")" | "(" expr ")"
"""

import math
import re
from dataclasses import dataclass
from typing import Dict, FrozenSet, Union

import numpy as np

from .base import DataValidationError

CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "atan": np.arctan,
}
VARIABLES = ("t", "x")

TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


class FormulaError(DataValidationError):
    """Raised when a formula cannot be parsed or evaluated"""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(message)
        self.offset = offset


def format_number(value: float) -> str:
    """Shortest text that reads back as the same float"""
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


######################################################################
#  E X P R E S S I O N   N O D E S
######################################################################
@dataclass(frozen=True)
class Num:
    """A literal number"""

    value: float


@dataclass(frozen=True)
class Name:
    """A variable or named constant"""

    name: str


@dataclass(frozen=True)
class Neg:
    """Unary minus"""

    operand: "Formula"


@dataclass(frozen=True)
class BinOp:
    """Binary arithmetic"""

    op: str
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Call:
    """Application of a named function"""

    func: str
    argument: "Formula"


Formula = Union[Num, Name, Neg, BinOp, Call]

PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
NEG_PRECEDENCE = 3


######################################################################
#  P A R S E R
######################################################################
class _Parser:
    """Recursive descent over the token list"""

    def __init__(self, text: str):
        self.text = text
        self.tokens = []
        position = 0
        while position < len(text):
            if text[position:].strip() == "":
                break
            match = TOKEN_RE.match(text, position)
            if not match:
                offset = position + len(text[position:]) - len(text[position:].lstrip())
                raise FormulaError(f"unexpected character {text[offset]!r}", offset)
            kind = match.lastgroup
            start = match.start(kind)
            self.tokens.append((kind, match.group(kind), start))
            position = match.end()
        self.index = 0

    def peek(self):
        """The next token or None at the end"""
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def offset(self) -> int:
        """Offset of the next token"""
        token = self.peek()
        return token[2] if token else len(self.text)

    def take(self, value: str = None):
        """Consumes the next token, optionally requiring its text"""
        token = self.peek()
        if token is None or (value is not None and token[1] != value):
            expected = f"'{value}'" if value else "an expression"
            found = f"'{token[1]}'" if token else "end of formula"
            raise FormulaError(f"expected {expected}, found {found}", self.offset())
        self.index += 1
        return token

    def parse(self) -> Formula:
        """Parses the whole text"""
        if not self.tokens:
            raise FormulaError("empty formula", 0)
        node = self.expr()
        if self.peek() is not None:
            raise FormulaError(f"unexpected '{self.peek()[1]}'", self.offset())
        return node

    def expr(self) -> Formula:
        node = self.term()
        while self.peek() and self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Formula:
        node = self.unary()
        while self.peek() and self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Formula:
        if self.peek() and self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Formula:
        node = self.atom()
        if self.peek() and self.peek()[1] == "^":
            self.take()
            node = BinOp("^", node, self.unary())
        return node

    def atom(self) -> Formula:
        kind, value, start = self.take()
        if kind == "number":
            return Num(float(value))
        if kind == "name":
            if value in FUNCTIONS:
                self.take("(")
                argument = self.expr()
                self.take(")")
                return Call(value, argument)
            if value in CONSTANTS or value in VARIABLES:
                return Name(value)
            raise FormulaError(f"unknown name '{value}'", start)
        if value == "(":
            node = self.expr()
            self.take(")")
            return node
        raise FormulaError(f"unexpected '{value}'", start)


def parse_formula(text: str) -> Formula:
    """Parses a formula, raising FormulaError with the failing offset"""
    return _Parser(text).parse()


######################################################################
#  E V A L U A T I O N   A N D   P R I N T I N G
######################################################################
def variables(node: Formula) -> FrozenSet[str]:
    """The free variables (t, x) used by a formula"""
    if isinstance(node, Name):
        return frozenset([node.name]) if node.name in VARIABLES else frozenset()
    if isinstance(node, Neg):
        return variables(node.operand)
    if isinstance(node, BinOp):
        return variables(node.left) | variables(node.right)
    if isinstance(node, Call):
        return variables(node.argument)
    return frozenset()


def evaluate(node: Formula, env: Dict[str, Union[float, np.ndarray]]):
    """Evaluates a formula with numpy semantics"""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Name):
        if node.name in CONSTANTS:
            return CONSTANTS[node.name]
        if node.name not in env:
            raise FormulaError(f"variable '{node.name}' is not available here")
        return env[node.name]
    if isinstance(node, Neg):
        return -evaluate(node.operand, env)
    if isinstance(node, Call):
        return FUNCTIONS[node.func](evaluate(node.argument, env))
    left = evaluate(node.left, env)
    right = evaluate(node.right, env)
    with np.errstate(all="ignore"):
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            return np.divide(left, right)
        return np.power(left, right)


def _precedence(node: Formula) -> int:
    if isinstance(node, BinOp):
        return PRECEDENCE[node.op]
    if isinstance(node, Neg):
        return NEG_PRECEDENCE
    if isinstance(node, Num) and node.value < 0:
        return NEG_PRECEDENCE
    return 5


def to_text(node: Formula) -> str:
    """Canonical text with minimal parentheses"""
    if isinstance(node, Num):
        return format_number(node.value)
    if isinstance(node, Name):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.argument)})"
    if isinstance(node, Neg):
        inner = to_text(node.operand)
        return f"-{inner}" if _precedence(node.operand) >= NEG_PRECEDENCE else f"-({inner})"
    prec = PRECEDENCE[node.op]
    left, right = to_text(node.left), to_text(node.right)
    if node.op == "^":
        # right associative; the base binds tighter than a leading minus
        if _precedence(node.left) <= PRECEDENCE["^"]:
            left = f"({left})"
        if _precedence(node.right) < NEG_PRECEDENCE:
            right = f"({right})"
        return f"{left}^{right}"
    if _precedence(node.left) < prec:
        left = f"({left})"
    if _precedence(node.right) <= prec:
        right = f"({right})"
    return f"{left} {node.op} {right}"

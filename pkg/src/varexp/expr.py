"""Coefficient expressions: a small recursive-descent parser and a vectorised evaluator.

Grammar (lowest to highest precedence)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | '+' unary | power
    power   := primary ('^' unary)?
    primary := NUMBER | IDENT | IDENT '(' expr (',' expr)* ')' | '(' expr ')'

``^`` binds tighter than unary minus and is right-associative, so ``-2^2`` is
``-4`` and ``2^3^2`` is ``512``.
"""

from __future__ import annotations

import math
import re
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from functools import reduce
from typing import Union

import numpy as np
import numpy.typing as npt

from varexp.errors import DomainError, ParseError, UnboundVariableError, UnknownIdentifierError

Value = Union[float, npt.NDArray[np.float64]]

DEFAULT_VARIABLES: tuple[str, ...] = ("x", "t")

CONSTANTS: dict[str, float] = {"pi": math.pi, "e": math.e}

# name -> (min arity, max arity or None for variadic)
FUNCTIONS: dict[str, tuple[int, int | None]] = {
    "sin": (1, 1),
    "cos": (1, 1),
    "exp": (1, 1),
    "log": (1, 1),
    "abs": (1, 1),
    "sqrt": (1, 1),
    "min": (2, None),
    "max": (2, None),
}

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    position: int


def tokenize(src: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(src):
        if src[pos].isspace():
            pos += 1
            continue
        match = _TOKEN_RE.match(src, pos)
        if match is None or match.end() == pos:
            raise ParseError(f"unexpected character '{src[pos]}'", pos)
        kind = match.lastgroup or "op"
        start = match.start(kind)
        tokens.append(Token(kind, match.group(kind), start))
        pos = match.end()
    tokens.append(Token("eof", "", len(src)))
    return tokens


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


class Node:
    """Base class of expression tree nodes."""

    def evaluate(self, env: Mapping[str, Value]) -> Value:
        raise NotImplementedError

    def variables(self) -> frozenset[str]:
        return frozenset()


@dataclass(frozen=True)
class Number(Node):
    value: float

    def evaluate(self, env: Mapping[str, Value]) -> Value:
        return self.value

    def __str__(self) -> str:
        return repr(self.value)


@dataclass(frozen=True)
class Constant(Node):
    name: str

    def evaluate(self, env: Mapping[str, Value]) -> Value:
        return CONSTANTS[self.name]

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Variable(Node):
    name: str

    def evaluate(self, env: Mapping[str, Value]) -> Value:
        return env[self.name]

    def variables(self) -> frozenset[str]:
        return frozenset({self.name})

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class UnaryOp(Node):
    op: str
    operand: Node

    def evaluate(self, env: Mapping[str, Value]) -> Value:
        value = self.operand.evaluate(env)
        return -value if self.op == "-" else value

    def variables(self) -> frozenset[str]:
        return self.operand.variables()

    def __str__(self) -> str:
        return f"({self.op}{self.operand})"


@dataclass(frozen=True)
class BinaryOp(Node):
    op: str
    left: Node
    right: Node

    def evaluate(self, env: Mapping[str, Value]) -> Value:
        lhs = self.left.evaluate(env)
        rhs = self.right.evaluate(env)
        if self.op == "+":
            return lhs + rhs
        if self.op == "-":
            return lhs - rhs
        if self.op == "*":
            return lhs * rhs
        if self.op == "/":
            if np.any(np.asarray(rhs) == 0.0):
                raise DomainError(f"division by zero in {self}")
            return lhs / rhs
        return _power(lhs, rhs, self)

    def variables(self) -> frozenset[str]:
        return self.left.variables() | self.right.variables()

    def __str__(self) -> str:
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Call(Node):
    name: str
    args: tuple[Node, ...]

    def evaluate(self, env: Mapping[str, Value]) -> Value:
        values = [arg.evaluate(env) for arg in self.args]
        if self.name in ("min", "max"):
            combine = np.minimum if self.name == "min" else np.maximum
            return reduce(combine, values)
        (arg,) = values
        if self.name == "log" and np.any(np.asarray(arg) <= 0.0):
            raise DomainError(f"log of a nonpositive value in {self}")
        if self.name == "sqrt" and np.any(np.asarray(arg) < 0.0):
            raise DomainError(f"sqrt of a negative value in {self}")
        return _UNARY_FUNCS[self.name](arg)

    def variables(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for arg in self.args:
            out |= arg.variables()
        return out

    def __str__(self) -> str:
        return f"{self.name}({', '.join(str(a) for a in self.args)})"


_UNARY_FUNCS: dict[str, Callable[[Value], Value]] = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "log": np.log,
    "abs": np.abs,
    "sqrt": np.sqrt,
}


def _power(base: Value, exponent: Value, node: Node) -> Value:
    b = np.asarray(base, dtype=float)
    x = np.asarray(exponent, dtype=float)
    non_integer = x != np.floor(x)
    if np.any((b < 0.0) & non_integer):
        raise DomainError(f"negative base with non-integer exponent in {node}")
    if np.any((b == 0.0) & (x < 0.0)):
        raise DomainError(f"zero raised to a negative power in {node}")
    with np.errstate(over="ignore", invalid="ignore"):
        return np.power(b, x)  # type: ignore[no-any-return]


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, src: str, variables: tuple[str, ...]) -> None:
        self.tokens = tokenize(src)
        self.index = 0
        self.variables = variables

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect(self, text: str) -> Token:
        token = self.current
        if token.text != text or token.kind == "eof":
            found = token.text or "end of input"
            raise ParseError(f"expected '{text}', found '{found}'", token.position)
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        if self.current.kind != "eof":
            raise ParseError(f"unexpected '{self.current.text}'", self.current.position)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.current.kind == "op" and self.current.text in "+-":
            op = self.advance().text
            node = BinaryOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.current.kind == "op" and self.current.text in "*/":
            op = self.advance().text
            node = BinaryOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.current.kind == "op" and self.current.text in "+-":
            op = self.advance().text
            return UnaryOp(op, self.unary())
        return self.power()

    def power(self) -> Node:
        node = self.primary()
        if self.current.kind == "op" and self.current.text == "^":
            self.advance()
            return BinaryOp("^", node, self.unary())
        return node

    def primary(self) -> Node:
        token = self.current
        if token.kind == "number":
            self.advance()
            return Number(float(token.text))
        if token.kind == "ident":
            self.advance()
            if self.current.text == "(" and self.current.kind == "op":
                return self.call(token)
            if token.text in self.variables:
                return Variable(token.text)
            if token.text in CONSTANTS:
                return Constant(token.text)
            raise UnknownIdentifierError(token.text, token.position)
        if token.kind == "op" and token.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = token.text or "end of input"
        raise ParseError(f"unexpected '{found}'", token.position)

    def call(self, name: Token) -> Node:
        if name.text not in FUNCTIONS:
            raise UnknownIdentifierError(name.text, name.position)
        self.expect("(")
        args = [self.expr()]
        while self.current.kind == "op" and self.current.text == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        low, high = FUNCTIONS[name.text]
        if len(args) < low or (high is not None and len(args) > high):
            raise ParseError(
                f"function '{name.text}' called with {len(args)} argument(s)", name.position
            )
        return Call(name.text, tuple(args))


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Expression:
    """A parsed, immutable coefficient expression."""

    source: str
    root: Node
    allowed: tuple[str, ...] = DEFAULT_VARIABLES

    @property
    def variables(self) -> frozenset[str]:
        return self.root.variables()

    def depends_on(self, name: str) -> bool:
        return name in self.variables

    def evaluate(self, bindings: Mapping[str, Value]) -> Value:
        """Evaluate at scalar or array bindings; arrays broadcast elementwise."""
        missing = sorted(self.variables - set(bindings))
        if missing:
            raise UnboundVariableError(missing)
        env = {
            k: (v if np.isscalar(v) else np.asarray(v, dtype=float)) for k, v in bindings.items()
        }
        with np.errstate(all="ignore"):
            result = self.root.evaluate(env)
        if not np.all(np.isfinite(result)):
            raise DomainError(f"non-finite value while evaluating '{self.source}'")
        if np.ndim(result) == 0:
            return float(result)
        return np.asarray(result, dtype=float)

    def __str__(self) -> str:
        return str(self.root)


def parse(src: str, variables: tuple[str, ...] = DEFAULT_VARIABLES) -> Expression:
    """Parse expression text into an :class:`Expression`."""
    if not src or not src.strip():
        raise ParseError("empty expression", 0)
    root = _Parser(src, variables).parse()
    return Expression(source=src, root=root, allowed=variables)


def evaluate(expr: Expression, bindings: Mapping[str, Value]) -> Value:
    return expr.evaluate(bindings)


def sample(
    expr: Expression, x: npt.NDArray[np.float64], t: float | None = None
) -> npt.NDArray[np.float64]:
    """Evaluate ``expr`` on the points ``x`` and always return an array of the same shape."""
    bindings: dict[str, Value] = {"x": x}
    if t is not None:
        bindings["t"] = t
    value = expr.evaluate(bindings)
    return np.broadcast_to(np.asarray(value, dtype=float), x.shape).copy()

"""Small rational expression language for right-hand sides and outputs.

Grammar::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := atom ("^" integer)?
    atom   := number | "x"integer | "u" | "(" expr ")" | "-" atom
            | "pwl" "(" expr (";" number "," number)+ ")"

Note that ``-x1^2`` reads as ``(-x1)^2`` because unary minus binds at the
atom level.  ``pwl(e; a0,b0; a1,b1; ...)`` is the piecewise-linear function
through the listed vertices, held constant outside them.

Expressions evaluate on floats or on numpy arrays (elementwise), so the
root finder can scan a whole grid in one call.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


class ExpressionError(ValueError):
    """Syntax error in an expression; ``col`` is 1-based."""

    def __init__(self, message: str, col: int | None = None, line: int | None = None):
        self.message = message
        self.col = col
        self.line = line
        super().__init__(self._render())

    def _render(self) -> str:
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.col is not None:
            where.append(f"column {self.col}")
        return f"{self.message} ({', '.join(where)})" if where else self.message

    def at_line(self, line: int, col_offset: int = 0) -> "ExpressionError":
        col = None if self.col is None else self.col + col_offset
        return ExpressionError(self.message, col=col, line=line)


class EvaluationError(ArithmeticError):
    """Division by zero (or a similar failure) inside an expression."""

    def __init__(self, message: str, subexpression: "Node"):
        self.subexpression = subexpression
        super().__init__(f"{message}: {subexpression}")


# -- AST ---------------------------------------------------------------------


class Node:
    def __str__(self) -> str:
        return self.to_text()

    def to_text(self) -> str:  # pragma: no cover - overridden
        raise NotImplementedError


@dataclass(frozen=True)
class Num(Node):
    value: float

    def to_text(self):
        return repr(float(self.value)) if self.value != int(self.value) else str(int(self.value))


@dataclass(frozen=True)
class Var(Node):
    """``index == 0`` is the input ``u``; ``index >= 1`` is state ``x<index>``."""

    index: int

    def to_text(self):
        return "u" if self.index == 0 else f"x{self.index}"


@dataclass(frozen=True)
class Neg(Node):
    operand: Node

    def to_text(self):
        return f"-({self.operand.to_text()})"


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    def to_text(self):
        return f"({self.left.to_text()} {self.op} {self.right.to_text()})"


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: int

    def to_text(self):
        return f"({self.base.to_text()})^{self.exponent}"


@dataclass(frozen=True)
class Pwl(Node):
    arg: Node
    points: tuple[tuple[float, float], ...]

    def to_text(self):
        pts = "; ".join(f"{a!r},{b!r}" for a, b in self.points)
        return f"pwl({self.arg.to_text()}; {pts})"


def variables(node: Node) -> set[int]:
    """Indices of every variable referenced (0 for ``u``)."""
    if isinstance(node, Var):
        return {node.index}
    if isinstance(node, Num):
        return set()
    if isinstance(node, Neg):
        return variables(node.operand)
    if isinstance(node, Pow):
        return variables(node.base)
    if isinstance(node, Pwl):
        return variables(node.arg)
    return variables(node.left) | variables(node.right)


# -- tokenizer / parser ------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<pwl>pwl\b)|(?P<var>x\d+|u\b)|(?P<op>[-+*/^(),;]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExpressionError(f"unexpected character {text[bad]!r}", col=bad + 1)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind) + 1))
        pos = m.end()
    tokens.append(("end", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, value: str | None = None, kind: str | None = None):
        tok = self.tokens[self.i]
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            want = value if value is not None else kind
            got = tok[1] or "end of input"
            raise ExpressionError(f"expected {want!r}, got {got!r}", col=tok[2])
        self.i += 1
        return tok

    def parse(self) -> Node:
        node = self.expr()
        if self.peek()[0] != "end":
            tok = self.peek()
            raise ExpressionError(f"unexpected {tok[1]!r}", col=tok[2])
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        node = self.atom()
        if self.peek()[1] == "^":
            self.take("^")
            sign = 1
            if self.peek()[1] == "-":
                self.take("-")
                sign = -1
            tok = self.take(kind="num")
            if not re.fullmatch(r"\d+", tok[1]):
                raise ExpressionError(f"exponent must be an integer, got {tok[1]!r}", col=tok[2])
            node = Pow(node, sign * int(tok[1]))
        return node

    def signed_number(self) -> float:
        sign = 1.0
        if self.peek()[1] == "-":
            self.take("-")
            sign = -1.0
        return sign * float(self.take(kind="num")[1])

    def atom(self) -> Node:
        kind, value, col = self.peek()
        if kind == "num":
            self.take()
            return Num(float(value))
        if kind == "var":
            self.take()
            return Var(0) if value == "u" else Var(int(value[1:]))
        if kind == "pwl":
            self.take()
            self.take("(")
            arg = self.expr()
            pts = []
            while self.peek()[1] == ";":
                self.take(";")
                a = self.signed_number()
                self.take(",")
                b = self.signed_number()
                pts.append((a, b))
            self.take(")")
            if len(pts) < 2:
                raise ExpressionError("pwl needs at least two vertices", col=col)
            if any(pts[k + 1][0] <= pts[k][0] for k in range(len(pts) - 1)):
                raise ExpressionError("pwl abscissae must be strictly increasing", col=col)
            return Pwl(arg, tuple(pts))
        if value == "(":
            self.take("(")
            node = self.expr()
            self.take(")")
            return node
        if value == "-":
            self.take("-")
            return Neg(self.atom())
        raise ExpressionError(f"unexpected {value or 'end of input'!r}", col=col)


def parse_expression(text: str) -> Node:
    return _Parser(text).parse()


# -- evaluation --------------------------------------------------------------

Compiled = Callable[[Sequence, object], object]


def _power(v, n: int):
    if n == 0:
        return v * 0 + 1.0
    acc = v
    for _ in range(abs(n) - 1):
        acc = acc * v
    return acc


def compile_expression(node: Node) -> Compiled:
    """Turn an AST into a closure ``f(x, u)`` where ``x[i-1]`` is state ``xi``."""
    if isinstance(node, Num):
        c = float(node.value)
        return lambda x, u: c
    if isinstance(node, Var):
        if node.index == 0:
            return lambda x, u: u
        k = node.index - 1
        return lambda x, u: x[k]
    if isinstance(node, Neg):
        f = compile_expression(node.operand)
        return lambda x, u: -f(x, u)
    if isinstance(node, Pow):
        f = compile_expression(node.base)
        n = node.exponent
        if n >= 0:
            return lambda x, u: _power(f(x, u), n)

        def inv_pow(x, u):
            d = _power(f(x, u), n)
            if np.any(np.asarray(d) == 0):
                raise EvaluationError("division by zero", node)
            return 1.0 / d

        return inv_pow
    if isinstance(node, Pwl):
        f = compile_expression(node.arg)
        xp = np.array([p[0] for p in node.points])
        fp = np.array([p[1] for p in node.points])

        def pwl(x, u):
            v = f(x, u)
            r = np.interp(v, xp, fp)
            return float(r) if np.ndim(r) == 0 else r

        return pwl
    if isinstance(node, BinOp):
        a = compile_expression(node.left)
        b = compile_expression(node.right)
        if node.op == "+":
            return lambda x, u: a(x, u) + b(x, u)
        if node.op == "-":
            return lambda x, u: a(x, u) - b(x, u)
        if node.op == "*":
            return lambda x, u: a(x, u) * b(x, u)

        def div(x, u):
            d = b(x, u)
            if np.any(np.asarray(d) == 0):
                raise EvaluationError("division by zero", node.right)
            return a(x, u) / d

        return div
    raise TypeError(f"not an expression node: {node!r}")


@dataclass(frozen=True)
class Expression:
    """Parsed expression plus its compiled evaluator."""

    tree: Node
    source: str = ""

    @classmethod
    def parse(cls, text: str) -> "Expression":
        return cls(parse_expression(text), text.strip())

    def __post_init__(self):
        object.__setattr__(self, "_fn", compile_expression(self.tree))

    def __call__(self, x, u=0.0):
        return self._fn(x, u)

    @property
    def max_state_index(self) -> int:
        return max((i for i in variables(self.tree) if i > 0), default=0)

    def __str__(self) -> str:
        return self.source or self.tree.to_text()


def eval_expression(e: Expression | Node, state, u: float = 0.0):
    """Evaluate ``e`` at ``state`` (sequence of x-values) and input ``u``."""
    if isinstance(e, Node):
        e = Expression(e)
    return e(np.atleast_1d(state) if np.ndim(state) == 0 else state, u)

"""A small expression language for transformations ``h(t1, ..., tp)``.

Grammar (EBNF)::

    expr    = term , { ("+" | "-") , term } ;
    term    = unary , { ("*" | "/") , unary } ;
    unary   = "-" , unary | power ;
    power   = atom , [ "^" , unary ] ;              (* right associative *)
    atom    = number | variable | call | "(" , expr , ")" ;
    call    = ("log" | "exp" | "min" | "max") , "(" , expr , { "," , expr } , ")" ;
    variable = "t" , digit , { digit } ;            (* t1 .. tp *)
    number  = digits , [ "." , [ digits ] ] , [ exponent ]
            | "." , digits , [ exponent ] ;
    exponent = ("e" | "E") , [ "+" | "-" ] , digits ;

``log`` is the natural logarithm; ``min`` and ``max`` take two or more
arguments. Implicit multiplication is not accepted (write ``3*t1``).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import (
    ArityError,
    EvaluationDomainError,
    ExprSyntaxError,
    NonnegativityError,
    UnknownIdentifierError,
    VariableIndexError,
)

__all__ = [
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "TransformExpr",
    "EvalDomainReport",
    "parse",
    "evaluate",
    "evaluate_rows",
    "check_nonnegative_on",
    "require_nonnegative",
]


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # zero-based


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


_FUNCTION_ARITY = {"log": (1, 1), "exp": (1, 1), "min": (2, None), "max": (2, None)}


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", pos)
        kind = m.lastgroup
        if kind == "number" and m.end() < len(source) and (source[m.end()].isalpha() or source[m.end()] == "_"):
            raise ExprSyntaxError("implicit multiplication is not allowed; use '*'", m.end())
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(source)))
    return tokens


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, source, arity, names):
        self.tokens = _tokenize(source)
        self.pos = 0
        self.arity = arity
        self.names = names

    @property
    def tok(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text):
        if self.tok.text != text:
            found = self.tok.text or "end of input"
            raise ExprSyntaxError(f"expected {text!r}, found {found!r}", self.tok.offset)
        return self.advance()

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {self.tok.text!r}", self.tok.offset)
        return node

    def expr(self):
        node = self.term()
        while self.tok.text in ("+", "-"):
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.tok.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        tok = self.tok
        if tok.kind == "number":
            self.advance()
            return Num(float(tok.text))
        if tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "ident":
            self.advance()
            if tok.text in _FUNCTION_ARITY:
                return self.call(tok)
            return self.variable(tok)
        found = tok.text or "end of input"
        raise ExprSyntaxError(f"unexpected {found!r}", tok.offset)

    def call(self, name_tok):
        if self.tok.text != "(":
            raise ExprSyntaxError(f"function {name_tok.text!r} must be called with parentheses", self.tok.offset)
        self.advance()
        args = [self.expr()]
        while self.tok.text == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        lo, hi = _FUNCTION_ARITY[name_tok.text]
        if len(args) < lo or (hi is not None and len(args) > hi):
            want = str(lo) if hi == lo else f"at least {lo}"
            raise ArityError(f"{name_tok.text} takes {want} argument(s), got {len(args)} (offset {name_tok.offset})")
        return Call(name_tok.text, tuple(args))

    def variable(self, tok):
        if tok.text in self.names:
            return Var(self.arity + self.names.index(tok.text))
        m = re.fullmatch(r"t(\d+)", tok.text)
        if m is None:
            raise UnknownIdentifierError(f"unknown identifier {tok.text!r} at offset {tok.offset}")
        k = int(m.group(1))
        if not 1 <= k <= self.arity:
            raise VariableIndexError(
                f"variable {tok.text!r} at offset {tok.offset} is out of range for {self.arity} variable(s)"
            )
        return Var(k - 1)


@dataclass(frozen=True)
class TransformExpr:
    """A parsed expression over ``t1..t{arity}`` plus optional named extras.

    Named extras (for instance a noise slot ``eps`` in a response formula)
    occupy the positions after the ``t`` variables.
    """

    root: object
    arity: int
    source: str = ""
    names: tuple = ()

    @property
    def width(self) -> int:
        """Number of inputs the expression consumes."""
        return self.arity + len(self.names)

    def __call__(self, point):
        return evaluate(self, point)

    def __str__(self):
        return to_source(self.root, self.arity, self.names)


def parse(source: str, p: int, names=()) -> TransformExpr:
    """Parse ``source`` into an expression over ``t1..tp``.

    Raises
    ------
    ExprSyntaxError, UnknownIdentifierError, VariableIndexError, ArityError
    """
    if not isinstance(source, str) or not source.strip():
        raise ExprSyntaxError("empty expression", 0)
    if p < 0:
        raise ValueError("variable count must be nonnegative")
    names = tuple(names)
    root = _Parser(source, p, names).parse()
    return TransformExpr(root, p, source, names)


def to_source(node, arity, names=()) -> str:
    """Fully parenthesised text that reparses to the same tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return f"t{node.index + 1}" if node.index < arity else names[node.index - arity]
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand, arity, names)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left, arity, names)} {node.op} {to_source(node.right, arity, names)})"
    if isinstance(node, Call):
        inner = ", ".join(to_source(a, arity, names) for a in node.args)
        return f"{node.name}({inner})"
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# Scalar evaluation


def _eval(node, point):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return point[node.index]
    if isinstance(node, Neg):
        return -_eval(node.operand, point)
    if isinstance(node, Call):
        args = [_eval(a, point) for a in node.args]
        if node.name == "log":
            if args[0] <= 0:
                raise EvaluationDomainError(f"log of non-positive value {args[0]!r}")
            return math.log(args[0])
        if node.name == "exp":
            try:
                return math.exp(args[0])
            except OverflowError:
                raise EvaluationDomainError(f"exp overflow at {args[0]!r}") from None
        return min(args) if node.name == "min" else max(args)

    a = _eval(node.left, point)
    b = _eval(node.right, point)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        if b == 0:
            raise EvaluationDomainError("division by zero")
        return a / b
    if a == 0 and b < 0:
        raise EvaluationDomainError("zero raised to a negative power")
    try:
        return math.pow(a, b)
    except ValueError:
        raise EvaluationDomainError(f"negative base {a!r} raised to non-integer power {b!r}") from None
    except OverflowError:
        raise EvaluationDomainError(f"overflow in {a!r}^{b!r}") from None


def evaluate(expr: TransformExpr, point) -> float:
    """Evaluate at one point of length ``expr.width``.

    Raises
    ------
    EvaluationDomainError
        On a domain violation or a non-finite result.
    ArityError
        If the point has the wrong length.
    """
    point = [float(v) for v in np.ravel(point)]
    if len(point) != expr.width:
        raise ArityError(f"expression takes {expr.width} value(s), got {len(point)}")
    value = float(_eval(expr.root, point))
    if not math.isfinite(value):
        raise EvaluationDomainError(f"non-finite result {value!r}")
    return value


# ---------------------------------------------------------------------------
# Vectorised evaluation over rows


def _first_bad(mask):
    return int(np.flatnonzero(mask)[0])


def _veval(node, cols, m):
    if isinstance(node, Num):
        return np.full(m, node.value)
    if isinstance(node, Var):
        return cols[node.index]
    if isinstance(node, Neg):
        return -_veval(node.operand, cols, m)
    if isinstance(node, Call):
        args = [_veval(a, cols, m) for a in node.args]
        if node.name == "log":
            bad = ~(args[0] > 0)
            if bad.any():
                row = _first_bad(bad)
                raise EvaluationDomainError(f"log of non-positive value {args[0][row]!r}", row)
            return np.log(args[0])
        if node.name == "exp":
            return np.exp(args[0])
        fold = np.minimum if node.name == "min" else np.maximum
        out = args[0]
        for a in args[1:]:
            out = fold(out, a)
        return out

    a = _veval(node.left, cols, m)
    b = _veval(node.right, cols, m)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        bad = b == 0
        if bad.any():
            raise EvaluationDomainError("division by zero", _first_bad(bad))
        return a / b
    bad = (a == 0) & (b < 0)
    if bad.any():
        raise EvaluationDomainError("zero raised to a negative power", _first_bad(bad))
    bad = (a < 0) & (b != np.floor(b))
    if bad.any():
        row = _first_bad(bad)
        raise EvaluationDomainError(f"negative base {a[row]!r} raised to non-integer power {b[row]!r}", row)
    return np.power(a, b)


def evaluate_rows(expr: TransformExpr, rows) -> np.ndarray:
    """Evaluate on every row of an ``(m, width)`` matrix.

    Domain errors carry the index of the first offending row.
    """
    rows = np.asarray(rows, dtype=float)
    if rows.ndim == 1 and expr.width <= 1:
        rows = rows.reshape(-1, 1) if expr.width == 1 else rows.reshape(-1, 0)
    if rows.ndim != 2 or rows.shape[1] != expr.width:
        raise ArityError(f"expression takes {expr.width} column(s), got array of shape {rows.shape}")
    m = rows.shape[0]
    cols = [rows[:, j] for j in range(rows.shape[1])]
    with np.errstate(all="ignore"):
        out = _veval(expr.root, cols, m)
    out = np.broadcast_to(out, (m,)).astype(float, copy=True)
    bad = ~np.isfinite(out)
    if bad.any():
        row = _first_bad(bad)
        raise EvaluationDomainError(f"non-finite result {out[row]!r}", row)
    return out


@dataclass(frozen=True)
class EvalDomainReport:
    nonneg_on_data: bool
    min_value_on_data: float


def check_nonnegative_on(expr: TransformExpr, features) -> EvalDomainReport:
    """Evaluate on every feature row and report the minimum value."""
    values = evaluate_rows(expr, features)
    if values.size == 0:
        return EvalDomainReport(True, math.inf)
    low = float(values.min())
    return EvalDomainReport(low >= 0, low)


def require_nonnegative(expr: TransformExpr, features) -> np.ndarray:
    """Values of ``expr`` on ``features``; raises NonnegativityError if any is negative."""
    values = evaluate_rows(expr, features)
    if values.size and values.min() < 0:
        row = _first_bad(values < 0)
        raise NonnegativityError(
            f"transformation {expr.source or str(expr)!r} is negative ({values[row]:.6g}) at feature row {row}"
        )
    return values

"""Polynomial expression syntax shared by tower descriptors and the session DSL.

Expressions use ``+ - * / ^``, parentheses, integer literals, plain names
(``u``, ``x``), indexed names (``X[i+1]``) and bounded reductions
``sum(i=0..n-1: ...)`` / ``prod(i=0..n-1: ...)``.  A number written directly
before a name (``2i``) multiplies it.  Index arithmetic and reduction bounds
are evaluated with integer bindings supplied by the caller.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Mapping, Optional, Tuple, Union

from .errors import ParseError, UniverseError

# ---------------------------------------------------------------- tokens

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t]+)
  | (?P<comment>\#.*)
  | (?P<num>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|\.\.|[-+*/^()\[\]{},=:])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # num | name | op | end
    text: str
    line: int
    col: int
    glued: bool = False  # no whitespace before this token


def tokenize(text: str, line: int = 1) -> List[Token]:
    out = []
    pos = 0
    prev_end = -1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, pos + 1, glued=(pos == prev_end)))
        pos = m.end()
        if kind not in ("ws", "comment"):
            prev_end = pos
    out.append(Token("end", "", line, len(text) + 1))
    return out


# ------------------------------------------------------------------- AST


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Name:
    id: str


@dataclass(frozen=True)
class Indexed:
    name: str
    index: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exp: "Node"


@dataclass(frozen=True)
class Reduce:
    kind: str  # sum | prod
    var: str
    lo: "Node"
    hi: "Node"
    body: "Node"


Node = Union[Num, Name, Indexed, BinOp, Neg, Pow, Reduce]

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def render(node: Node) -> str:
    """Canonical text; ``parse_expr(render(n)) == n``."""
    if isinstance(node, Num):
        return str(node.value)
    if isinstance(node, Name):
        return node.id
    if isinstance(node, Indexed):
        return f"{node.name}[{render(node.index)}]"
    if isinstance(node, Neg):
        inner = render(node.operand)
        if isinstance(node.operand, (BinOp, Neg)):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Pow):
        base = render(node.base)
        if isinstance(node.base, (BinOp, Neg, Pow)):
            base = f"({base})"
        exp = render(node.exp)
        if not isinstance(node.exp, (Num, Name)):
            exp = f"({exp})"
        return f"{base}^{exp}"
    if isinstance(node, Reduce):
        return f"{node.kind}({node.var}={render(node.lo)}..{render(node.hi)}: {render(node.body)})"
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        left = render(node.left)
        if isinstance(node.left, BinOp) and _PREC[node.left.op] < p:
            left = f"({left})"
        right = render(node.right)
        if isinstance(node.right, BinOp) and _PREC[node.right.op] <= p:
            right = f"({right})"
        if isinstance(node.right, Neg):
            right = f"({right})"
        sep = " " if p == 1 else ""
        return f"{left}{sep}{node.op}{sep}{right}"
    raise TypeError(node)


# ---------------------------------------------------------------- parser


class TokenStream:
    def __init__(self, tokens: List[Token]):
        self.toks = tokens
        self.i = 0

    @property
    def cur(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text) -> bool:
        t = self.cur
        return t.kind in ("op", "name") and t.text == text

    def advance(self) -> Token:
        t = self.cur
        if t.kind != "end":
            self.i += 1
        return t

    def expect(self, text) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.cur.text or 'end of line'!r}")
        return self.advance()

    def expect_kind(self, kind, what=None) -> Token:
        if self.cur.kind != kind:
            self.error(f"expected {what or kind}, found {self.cur.text or 'end of line'!r}")
        return self.advance()

    def error(self, msg):
        raise ParseError(msg, self.cur.line, self.cur.col)


_STOP = {")", "]", "}", ",", "..", ":", "->", "="}


def parse_expression(ts: TokenStream) -> Node:
    node = _term(ts)
    while ts.cur.kind == "op" and ts.cur.text in ("+", "-"):
        op = ts.advance().text
        node = BinOp(op, node, _term(ts))
    return node


def _term(ts):
    node = _unary(ts)
    while True:
        t = ts.cur
        if t.kind == "op" and t.text in ("*", "/"):
            op = ts.advance().text
            node = BinOp(op, node, _unary(ts))
        elif isinstance(node, Num) and t.glued and t.kind == "name":
            # 2i, 3X[0]
            node = BinOp("*", node, _unary(ts))
        else:
            return node


def _unary(ts):
    if ts.at("-"):
        ts.advance()
        return Neg(_unary(ts))
    if ts.at("+"):
        ts.advance()
        return _unary(ts)
    return _power(ts)


def _power(ts):
    base = _atom(ts)
    if ts.at("^"):
        ts.advance()
        if ts.at("("):
            ts.advance()
            exp = parse_expression(ts)
            ts.expect(")")
        elif ts.cur.kind == "num":
            exp = Num(int(ts.advance().text))
        elif ts.cur.kind == "name":
            exp = Name(ts.advance().text)
        else:
            ts.error("expected exponent")
        return Pow(base, exp)
    return base


def _atom(ts):
    t = ts.cur
    if t.kind == "num":
        ts.advance()
        return Num(int(t.text))
    if t.kind == "name":
        if t.text in ("sum", "prod") and ts.peek().text == "(":
            return _reduce(ts)
        ts.advance()
        if ts.at("[") and ts.cur.glued:
            ts.advance()
            idx = parse_expression(ts)
            ts.expect("]")
            return Indexed(t.text, idx)
        return Name(t.text)
    if ts.at("("):
        ts.advance()
        node = parse_expression(ts)
        ts.expect(")")
        return node
    ts.error(f"unexpected {t.text or 'end of line'!r} in expression")


def _reduce(ts):
    kind = ts.advance().text
    ts.expect("(")
    var = ts.expect_kind("name", "index variable").text
    ts.expect("=")
    lo = parse_expression(ts)
    ts.expect("..")
    hi = parse_expression(ts)
    ts.expect(":")
    body = parse_expression(ts)
    ts.expect(")")
    return Reduce(kind, var, lo, hi, body)


def parse_expr(text: str) -> Node:
    ts = TokenStream(tokenize(text))
    node = parse_expression(ts)
    if ts.cur.kind != "end":
        ts.error(f"trailing input {ts.cur.text!r}")
    return node


# ------------------------------------------------------------- evaluation

Resolver = Callable[[str, Optional[int]], object]


def _as_int(v, what):
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction) and v.denominator == 1:
        return int(v)
    raise ValueError(f"{what} must evaluate to an integer, got {v}")


def evaluate(node: Node, resolve: Resolver, env: Mapping[str, int] = None):
    """Evaluate ``node``; integer bindings in ``env`` shadow resolver names.

    ``resolve(name, index)`` supplies values for symbols (``index`` is
    ``None`` for plain names).  Values only need ring operators, so the same
    evaluator serves Poly, series and scalar arithmetic.
    """
    env = env or {}

    def ev(n):
        if isinstance(n, Num):
            return Fraction(n.value)
        if isinstance(n, Name):
            if n.id in env:
                return Fraction(env[n.id])
            return resolve(n.id, None)
        if isinstance(n, Indexed):
            k = _as_int(ev_index(n.index), f"index of {n.name}")
            if k < 0:
                raise UniverseError(f"negative index {n.name}[{k}]")
            return resolve(n.name, k)
        if isinstance(n, Neg):
            return -ev(n.operand)
        if isinstance(n, Pow):
            k = _as_int(ev_index(n.exp), "exponent")
            if k < 0:
                raise ValueError("negative exponent")
            base = ev(n.base)
            return base**k
        if isinstance(n, BinOp):
            a, b = ev(n.left), ev(n.right)
            if n.op == "+":
                return a + b
            if n.op == "-":
                return a - b
            if n.op == "*":
                return a * b
            if not isinstance(b, Fraction):
                raise ValueError("division is only defined by nonzero rational constants")
            if not b:
                raise ZeroDivisionError("division by zero in expression")
            return a * (1 / b)
        if isinstance(n, Reduce):
            lo = _as_int(ev_index(n.lo), "lower bound")
            hi = _as_int(ev_index(n.hi), "upper bound")
            acc = Fraction(0 if n.kind == "sum" else 1)
            for k in range(lo, hi + 1):
                val = evaluate(n.body, resolve, {**env, n.var: k})
                acc = acc + val if n.kind == "sum" else acc * val
            return acc
        raise TypeError(n)

    def ev_index(n):
        return evaluate(n, _no_symbols, env)

    return ev(node)


def _no_symbols(name, index):
    raise UniverseError(f"symbol {name} is not allowed in an index expression")


def free_names(node: Node, bound=frozenset()) -> set:
    """Plain and indexed symbol names used by ``node`` (minus bound vars)."""
    if isinstance(node, Num):
        return set()
    if isinstance(node, Name):
        return set() if node.id in bound else {node.id}
    if isinstance(node, Indexed):
        return {node.name}
    if isinstance(node, Neg):
        return free_names(node.operand, bound)
    if isinstance(node, Pow):
        return free_names(node.base, bound)
    if isinstance(node, BinOp):
        return free_names(node.left, bound) | free_names(node.right, bound)
    if isinstance(node, Reduce):
        return free_names(node.body, bound | {node.var})
    raise TypeError(node)


def affine_in(node: Node, var: str, env: Mapping[str, int] = None) -> Tuple[int, int]:
    """(slope, offset) of an index expression that is affine in ``var``."""
    env = dict(env or {})
    vals = [_as_int(evaluate(node, _no_symbols, {**env, var: k}), "index") for k in (0, 1, 2)]
    slope = vals[1] - vals[0]
    if vals[2] - vals[1] != slope:
        raise ValueError(f"index pattern {render(node)} is not affine in {var}")
    return slope, vals[0]


def parse_poly(text: str, universe):
    """Parse ``text`` into a Poly over ``universe`` (a tuple of VarId)."""
    from .exactpoly import Poly, VarId

    universe = tuple(universe)

    def resolve(name, index):
        v = VarId(name, index)
        if v not in universe:
            raise UniverseError(f"unknown variable {v}")
        return Poly.var(universe, v)

    val = evaluate(parse_expr(text), resolve)
    if isinstance(val, Fraction):
        return Poly.const(universe, val)
    return val

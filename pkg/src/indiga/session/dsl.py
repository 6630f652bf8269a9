"""Session script syntax: parsing, static name checks and canonical rendering.

One statement per line::

    let T = tower adic vars=[u] ideal=[u]
    let D = der T { u -> u^2 }
    check-integrable D level 6 power 12

A statement is a head word followed by arguments.  An argument is a
positional expression, ``key=value`` (value an expression or ``[list]``),
a numeric knob ``level 6``, or a rule block ``{ lhs -> rhs, ... }``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from ..errors import ParseError, SessionNameError
from ..expr import (
    Indexed,
    Name,
    Neg,
    Node,
    Num,
    TokenStream,
    free_names,
    parse_expression,
    render as render_expr,
    tokenize,
)

KNOBS = ("level", "power", "deg", "depth", "shift", "samples")
TOWER_KINDS = ("adic", "cutoff", "discrete", "dual", "dual_coordinate", "tensor", "quotient", "localize")
DEFINITIONS = ("tower", "elem", "der", "dual", "transform", "coaction")
COMMANDS = (
    "check-integrable",
    "exp",
    "verify-coaction",
    "flow",
    "flow-law",
    "invariants",
    "invariant",
    "slice",
    "reynolds",
    "decompose",
    "localize",
    "metric",
    "orbit",
    "audit",
)


@dataclass(frozen=True)
class Pos:
    value: Node


@dataclass(frozen=True)
class Opt:
    key: str
    value: Union[Node, Tuple[Node, ...]]
    is_list: bool = False


@dataclass(frozen=True)
class Knob:
    key: str
    value: int


@dataclass(frozen=True)
class Rules:
    rules: Tuple[Tuple[Node, Node], ...]


Arg = Union[Pos, Opt, Knob, Rules]


@dataclass(frozen=True)
class Statement:
    head: str
    name: Optional[str]
    args: Tuple[Arg, ...]
    line: int = field(default=0, compare=False)

    # accessors used by the runner

    def positionals(self) -> List[Node]:
        return [a.value for a in self.args if isinstance(a, Pos)]

    def option(self, key, default=None):
        for a in self.args:
            if isinstance(a, Opt) and a.key == key:
                return a.value
        return default

    def knob(self, key, default=None):
        for a in self.args:
            if isinstance(a, Knob) and a.key == key:
                return a.value
        return default

    def rules(self) -> Optional[Tuple[Tuple[Node, Node], ...]]:
        for a in self.args:
            if isinstance(a, Rules):
                return a.rules
        return None

    def render(self) -> str:
        parts = [self.head]
        args = list(self.args)
        for k, a in enumerate(args):
            last = k == len(args) - 1
            if isinstance(a, Pos):
                parts.append(_render_value(a.value, bare=last))
            elif isinstance(a, Opt):
                if a.is_list:
                    parts.append(f"{a.key}=[{', '.join(render_expr(v) for v in a.value)}]")
                else:
                    parts.append(f"{a.key}={_render_value(a.value, bare=False)}")
            elif isinstance(a, Knob):
                parts.append(f"{a.key} {a.value}")
            else:
                body = ", ".join(f"{render_expr(l)} -> {render_expr(r)}" for l, r in a.rules)
                parts.append("{ " + body + " }" if body else "{ }")
        text = " ".join(parts)
        if self.name is not None:
            text = f"let {self.name} = {text}"
        return text


def _render_value(node, bare):
    text = render_expr(node)
    if bare or isinstance(node, (Name, Num, Indexed)):
        return text
    return f"({text})"


@dataclass(frozen=True)
class SessionScript:
    statements: Tuple[Statement, ...]

    def render(self) -> str:
        return "".join(s.render() + "\n" for s in self.statements)

    def __len__(self):
        return len(self.statements)


# ---------------------------------------------------------------- parsing


def _parse_args(ts: TokenStream) -> List[Arg]:
    args: List[Arg] = []
    while ts.cur.kind != "end":
        t = ts.cur
        if ts.at("{"):
            ts.advance()
            rules = []
            while not ts.at("}"):
                lhs = parse_expression(ts)
                ts.expect("->")
                rhs = parse_expression(ts)
                rules.append((lhs, rhs))
                if ts.at(","):
                    ts.advance()
                elif not ts.at("}"):
                    ts.error(f"expected ',' or '}}' in rule block, found {ts.cur.text or 'end of line'!r}")
            ts.advance()
            args.append(Rules(tuple(rules)))
        elif t.kind == "name" and ts.peek().text == "=" and ts.peek().kind == "op":
            key = ts.advance().text
            ts.advance()
            if ts.at("["):
                ts.advance()
                items = []
                while not ts.at("]"):
                    items.append(parse_expression(ts))
                    if ts.at(","):
                        ts.advance()
                    elif not ts.at("]"):
                        ts.error(f"expected ',' or ']' in list, found {ts.cur.text or 'end of line'!r}")
                ts.advance()
                args.append(Opt(key, tuple(items), True))
            else:
                args.append(Opt(key, parse_expression(ts)))
        elif t.kind == "name" and t.text in KNOBS and ts.peek().kind == "num":
            ts.advance()
            args.append(Knob(t.text, int(ts.advance().text)))
        else:
            args.append(Pos(parse_expression(ts)))
    return args


def parse_statement(text: str, line: int = 1) -> Optional[Statement]:
    toks = tokenize(text, line)
    ts = TokenStream(toks)
    if ts.cur.kind == "end":
        return None
    name = None
    if ts.at("let"):
        ts.advance()
        name = ts.expect_kind("name", "binding name").text
        ts.expect("=")
    head_tok = ts.cur
    head = _read_head(ts)
    if name is not None and head not in DEFINITIONS:
        raise ParseError(f"unknown definition {head!r}", head_tok.line, head_tok.col)
    if name is None and head not in COMMANDS:
        raise ParseError(f"unknown command {head!r}", head_tok.line, head_tok.col)
    kind_tok = ts.cur
    args = _parse_args(ts)
    st = Statement(head, name, tuple(args), line)
    _check_shape(st, kind_tok)
    return st


def _read_head(ts: TokenStream) -> str:
    # command names may contain dashes: check-integrable, verify-coaction, flow-law
    t = ts.expect_kind("name", "statement")
    word = t.text
    while ts.at("-") and ts.cur.glued and ts.peek().kind == "name" and ts.peek().glued:
        ts.advance()
        word += "-" + ts.advance().text
    return word


def _err(tok, msg):
    raise ParseError(msg, tok.line, tok.col)


def _check_shape(st: Statement, tok):
    pos = st.positionals()
    if st.head == "tower":
        if not pos or not isinstance(pos[0], Name):
            _err(tok, "expected a tower kind")
        if pos[0].id not in TOWER_KINDS:
            _err(tok, f"unknown tower kind {pos[0].id!r}")
        kind = pos[0].id
        need = {
            "adic": ["vars", "ideal"],
            "discrete": ["vars"],
            "dual": ["vars"],
            "dual_coordinate": ["vars"],
            "cutoff": [],
            "quotient": ["ideal"],
            "localize": ["f"],
            "tensor": [],
        }[kind]
        for key in need:
            if st.option(key) is None:
                _err(tok, f"{kind} tower needs {key}=")
        npos = {"tensor": 3, "quotient": 2, "localize": 2}.get(kind, 1)
        if len(pos) != npos:
            _err(tok, f"{kind} tower takes {npos - 1} tower argument(s)")
    elif st.head in ("der", "coaction", "dual"):
        if len(pos) != 1 or not isinstance(pos[0], Name):
            _err(tok, f"{st.head} needs exactly one tower name")
        if st.rules() is None:
            _err(tok, f"{st.head} needs a rule block {{ ... }}")
    elif st.head == "elem":
        if len(pos) != 2 or not isinstance(pos[0], Name):
            _err(tok, "elem needs a tower name and an expression")
    elif st.head == "transform":
        if len(pos) < 2 or not isinstance(pos[0], Name) or not isinstance(pos[1], Name):
            _err(tok, "transform needs a derivation and a mode")
        if pos[1].id not in ("scale", "sum", "quotient", "localize"):
            _err(tok, f"unknown transform mode {pos[1].id!r}")
    else:
        need = {
            "check-integrable": 1,
            "exp": 2,
            "verify-coaction": 1,
            "flow": 2,
            "flow-law": 1,
            "invariants": 1,
            "invariant": 2,
            "slice": 1,
            "reynolds": 2,
            "decompose": 2,
            "localize": 1,
            "metric": 2,
            "orbit": 1,
            "audit": 1,
        }[st.head]
        if len(pos) != need:
            _err(tok, f"{st.head} takes {need} positional argument(s), got {len(pos)}")
        if not isinstance(pos[0], Name):
            _err(tok, f"{st.head} needs a binding name first")


def parse_session(text: str) -> SessionScript:
    """Parse a whole script; names must be bound before they are used."""
    stmts = []
    for k, raw in enumerate(text.splitlines(), start=1):
        st = parse_statement(raw, k)
        if st is not None:
            stmts.append(st)
    script = SessionScript(tuple(stmts))
    check_names(script)
    return script


# ---------------------------------------------------------- name checking


@dataclass
class _Sym:
    kind: str  # tower | elem | der | exp
    tower: Optional[str] = None
    gens: Dict[str, bool] = field(default_factory=dict)  # tower generator names -> family


def check_names(script: SessionScript):
    table: Dict[str, _Sym] = {}

    def fail(st, msg):
        raise SessionNameError(f"line {st.line}: {msg}")

    def need(st, name, kinds):
        sym = table.get(name)
        if sym is None:
            fail(st, f"{name!r} is not defined")
        if sym.kind not in kinds:
            fail(st, f"{name!r} is a {sym.kind}, expected {' or '.join(kinds)}")
        return sym

    def tower_of(st, name):
        sym = table[name]
        return sym.tower if sym.kind != "tower" else name

    def check_expr(st, node, tower, extra=()):
        gens = table[tower].gens
        for nm in free_names(node):
            if nm in extra or nm in gens:
                continue
            sym = table.get(nm)
            if sym is None:
                fail(st, f"{nm!r} is not defined")
            if sym.kind != "elem":
                fail(st, f"{nm!r} is a {sym.kind}, not an element")

    for st in script.statements:
        pos = st.positionals()
        if st.head == "tower":
            kind = pos[0].id
            sym = _Sym("tower")
            if kind in ("adic", "discrete", "dual", "dual_coordinate"):
                for v in st.option("vars", ()):
                    if not isinstance(v, Name):
                        fail(st, "vars must be plain names")
                    sym.gens[v.id] = False
            elif kind == "cutoff":
                fam = st.option("family", Name("X"))
                sym.gens[fam.id if isinstance(fam, Name) else "X"] = True
            elif kind == "tensor":
                for p in pos[1:]:
                    t = need(st, p.id, ("tower",))
                    sym.gens.update(t.gens)
            else:
                base = need(st, pos[1].id, ("tower",))
                sym.gens.update(base.gens)
                if kind == "quotient":
                    for g in st.option("ideal"):
                        check_expr(st, g, pos[1].id, ("n",))
                else:
                    check_expr(st, st.option("f"), pos[1].id, ("n",))
                    sym.gens[_fresh_w(base.gens)] = False
            if kind in ("adic", "discrete", "dual", "dual_coordinate"):
                for key in ("ideal", "relations"):
                    for g in st.option(key, ()):
                        bad = free_names(g) - set(sym.gens)
                        if bad:
                            fail(st, f"{sorted(bad)[0]!r} is not a variable of this tower")
            table[st.name] = sym
        elif st.head == "elem":
            need(st, pos[0].id, ("tower",))
            check_expr(st, pos[1], pos[0].id, ("n",))
            table[st.name] = _Sym("elem", pos[0].id)
        elif st.head in ("der", "coaction"):
            need(st, pos[0].id, ("tower",))
            for lhs, rhs in st.rules():
                extra = ("i", "n", "T") if st.head == "coaction" else ("i", "n")
                check_expr(st, rhs, pos[0].id, extra + _pattern_vars(lhs))
            table[st.name] = _Sym("der" if st.head == "der" else "exp", pos[0].id)
        elif st.head == "dual":
            alg = need(st, pos[0].id, ("tower",))
            tname = st.option("tower")
            if not isinstance(tname, Name):
                fail(st, "dual needs tower=NAME for the dual-coordinate tower")
            fam = st.option("family", Name("X"))
            table[tname.id] = _Sym("tower", gens={fam.id: True})
            for lhs, rhs in st.rules():
                check_expr(st, rhs, pos[0].id)
            table[st.name] = _Sym("der", tname.id)
        elif st.head == "transform":
            d = need(st, pos[0].id, ("der",))
            mode = pos[1].id
            tower = d.tower
            if mode == "sum":
                need(st, pos[2].id if len(pos) > 2 and isinstance(pos[2], Name) else "?", ("der",))
                table[st.name] = _Sym("der", tower)
            elif mode == "scale":
                check_expr(st, pos[2], tower, ("n",))
                table[st.name] = _Sym("der", tower)
            else:
                if mode == "quotient":
                    items = st.option("ideal")
                    if items is None:
                        fail(st, "quotient transform needs ideal=[...]")
                    for g in items:
                        check_expr(st, g, tower, ("n",))
                else:
                    f = st.option("f")
                    if f is None:
                        fail(st, "localize transform needs f=")
                    check_expr(st, f, tower, ("n",))
                tname = st.option("tower")
                new = tname.id if isinstance(tname, Name) else f"{st.name}.tower"
                gens = dict(table[tower].gens)
                if mode == "localize":
                    gens[_fresh_w(gens)] = False
                table[new] = _Sym("tower", gens=gens)
                table[st.name] = _Sym("der", new)
        else:
            _check_command(st, pos, table, need, check_expr, tower_of)


def _check_command(st, pos, table, need, check_expr, tower_of):
    head = st.head
    if head in ("localize", "audit"):
        need(st, pos[0].id, ("tower",))
        if head == "localize":
            f = st.option("f")
            if f is None:
                raise SessionNameError(f"line {st.line}: localize needs f=")
            check_expr(st, f, pos[0].id, ("n",))
        return
    if head == "metric":
        a = need(st, pos[0].id, ("elem",))
        check_expr(st, pos[1], a.tower, ("n",))
        return
    kinds = ("der", "exp") if head in ("verify-coaction", "invariant") else ("der",)
    sym = need(st, pos[0].id, kinds)
    tower = sym.tower
    for p in pos[1:]:
        check_expr(st, p, tower, ("n",))
    for key in ("t", "s"):
        v = st.option(key)
        if v is not None:
            check_expr(st, v, tower, ("n",))
    for c in st.option("candidates", ()) or ():
        check_expr(st, c, tower, ("n",))


def _pattern_vars(lhs):
    if isinstance(lhs, Indexed):
        return tuple(free_names(lhs.index) | _index_names(lhs.index))
    return ()


def _index_names(node):
    from ..expr import BinOp, Pow, Reduce

    if isinstance(node, Name):
        return {node.id}
    if isinstance(node, BinOp):
        return _index_names(node.left) | _index_names(node.right)
    if isinstance(node, Neg):
        return _index_names(node.operand)
    if isinstance(node, Pow):
        return _index_names(node.base)
    return set()


def _fresh_w(gens):
    name, k = "w", 1
    while name in gens:
        name = f"w{k}"
        k += 1
    return name

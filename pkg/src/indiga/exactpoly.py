"""Sparse multivariate polynomials over the rationals.

A :class:`Poly` lives over a fixed, ordered *universe* of :class:`VarId`
values and stores its terms as a mapping from exponent tuples (one entry per
universe variable) to nonzero :class:`fractions.Fraction` coefficients.
Polynomials are immutable; every operation returns a new value.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

from .errors import UniverseError

# exponents are kept below one machine word; larger values mean a runaway loop
MAX_EXPONENT = 2**63 - 1

Exps = Tuple[int, ...]


@dataclass(frozen=True)
class VarId:
    """A variable name, optionally indexed (``X[3]``) for countable families."""

    name: str
    index: Optional[int] = None

    def __post_init__(self):
        if self.index is not None and self.index < 0:
            raise ValueError(f"negative variable index {self.index}")

    @property
    def key(self):
        return (self.name, -1 if self.index is None else self.index)

    def __lt__(self, other):
        return self.key < other.key

    def __str__(self):
        return self.name if self.index is None else f"{self.name}[{self.index}]"

    def __repr__(self):
        return f"VarId({self})"


def _grevlex_key(exps):
    return (sum(exps), tuple(-e for e in reversed(exps)))


@dataclass(frozen=True)
class MonomialOrder:
    """Monomial order on exponent tuples.

    ``kind`` is ``"lex"``, ``"grevlex"`` or ``"elim"``.  The elimination order
    compares the first ``block`` variables by grevlex and breaks ties with
    grevlex on the remaining ones, so any monomial involving the first block
    beats every monomial free of it with smaller block degree.
    """

    kind: str = "grevlex"
    block: int = 0

    def __post_init__(self):
        if self.kind not in ("lex", "grevlex", "elim"):
            raise ValueError(f"unknown monomial order {self.kind!r}")

    def key(self, exps: Exps):
        if self.kind == "lex":
            return exps
        if self.kind == "grevlex":
            return _grevlex_key(exps)
        return (_grevlex_key(exps[: self.block]), _grevlex_key(exps[self.block:]))

    def __str__(self):
        return f"elim({self.block})" if self.kind == "elim" else self.kind


GREVLEX = MonomialOrder("grevlex")
LEX = MonomialOrder("lex")


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, str)):
        return Fraction(c)
    raise TypeError(f"unsupported coefficient type {type(c).__name__}")


def _check_exponent(e):
    if e > MAX_EXPONENT:
        raise OverflowError(f"exponent {e} exceeds the machine-word bound")


class Poly:
    __slots__ = ("universe", "terms", "_hash")

    def __init__(self, universe: Sequence[VarId], terms: Optional[Mapping[Exps, object]] = None):
        self.universe: Tuple[VarId, ...] = tuple(universe)
        clean: Dict[Exps, Fraction] = {}
        if terms:
            width = len(self.universe)
            for exps, c in terms.items():
                if len(exps) != width:
                    raise UniverseError(
                        f"exponent vector {exps} does not match universe of size {width}"
                    )
                c = _as_fraction(c)
                if c:
                    clean[tuple(exps)] = c
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, universe, terms):
        # trusted constructor: terms already nonzero Fractions keyed by tuples
        p = cls.__new__(cls)
        p.universe = universe
        p.terms = terms
        p._hash = None
        return p

    # constructors

    @classmethod
    def zero(cls, universe):
        return cls._raw(tuple(universe), {})

    @classmethod
    def const(cls, universe, c):
        universe = tuple(universe)
        c = _as_fraction(c)
        return cls._raw(universe, {(0,) * len(universe): c} if c else {})

    @classmethod
    def var(cls, universe, v: VarId):
        universe = tuple(universe)
        try:
            i = universe.index(v)
        except ValueError:
            raise UniverseError(f"variable {v} not in universe") from None
        exps = [0] * len(universe)
        exps[i] = 1
        return cls._raw(universe, {tuple(exps): Fraction(1)})

    # basic queries

    def is_zero(self):
        return not self.terms

    def is_constant(self):
        return all(not any(e) for e in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * len(self.universe), Fraction(0))

    def degree(self):
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, v: VarId):
        i = self._index(v)
        return max((e[i] for e in self.terms), default=-1)

    def variables(self):
        used = set()
        for e in self.terms:
            used.update(i for i, k in enumerate(e) if k)
        return [self.universe[i] for i in sorted(used)]

    def _index(self, v):
        try:
            return self.universe.index(v)
        except ValueError:
            raise UniverseError(f"variable {v} not in universe {self._ustr()}") from None

    def _ustr(self):
        return "[" + ", ".join(map(str, self.universe)) + "]"

    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.universe != self.universe:
                raise UniverseError(
                    f"universe mismatch: {self._ustr()} vs {other._ustr()}"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.const(self.universe, other)
        return NotImplemented

    # arithmetic

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return Poly._raw(self.universe, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.universe, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = _as_fraction(c)
        if not c:
            return Poly.zero(self.universe)
        return Poly._raw(self.universe, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self.terms or not other.terms:
            return Poly.zero(self.universe)
        if self.degree() + other.degree() > MAX_EXPONENT:
            raise OverflowError("product degree exceeds the machine-word bound")
        out: Dict[Exps, Fraction] = {}
        get = out.get
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                else:
                    del out[e]
        return Poly._raw(self.universe, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        if k and self.degree() > 0:
            _check_exponent(self.degree() * k)
        result = Poly.const(self.universe, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(self.universe, other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.universe == other.universe and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.universe, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # structure maps

    def substitute(self, assignment: Mapping[VarId, "Poly"], universe=None) -> "Poly":
        """Apply the ring homomorphism sending each variable to its image.

        Every variable that actually occurs in ``self`` must be assigned.  The
        result lives over ``universe`` (by default the common universe of the
        images).
        """
        if universe is None:
            images = list(assignment.values())
            if not images:
                if self.is_constant():
                    raise UniverseError("empty assignment needs an explicit target universe")
                raise UniverseError("assignment does not cover the polynomial's variables")
            universe = images[0].universe
        universe = tuple(universe)
        for img in assignment.values():
            if img.universe != universe:
                raise UniverseError("substitution images disagree on their universe")
        slots = []
        for i, v in enumerate(self.universe):
            if v in assignment:
                slots.append(assignment[v])
            else:
                slots.append(None)
        powers: Dict[Tuple[int, int], Poly] = {}

        def power(i, k):
            key = (i, k)
            if key not in powers:
                powers[key] = slots[i] ** k
            return powers[key]

        result = Poly.zero(universe)
        for exps, c in self.terms.items():
            term = Poly.const(universe, c)
            for i, k in enumerate(exps):
                if not k:
                    continue
                if slots[i] is None:
                    raise UniverseError(f"no image assigned to variable {self.universe[i]}")
                term = term * power(i, k)
            result = result + term
        return result

    def embed(self, universe: Sequence[VarId]) -> "Poly":
        """Re-express over a universe containing every variable that occurs."""
        universe = tuple(universe)
        if universe == self.universe:
            return self
        pos = {v: j for j, v in enumerate(universe)}
        used = set(self.variables())
        missing = [str(v) for v in used if v not in pos]
        if missing:
            raise UniverseError(f"cannot embed: variables {missing} absent from target")
        idx = [pos.get(v) for v in self.universe]
        out = {}
        width = len(universe)
        for e, c in self.terms.items():
            ne = [0] * width
            for i, k in enumerate(e):
                if k:
                    ne[idx[i]] = k
            out[tuple(ne)] = c
        return Poly._raw(universe, out)

    def partial(self, v: VarId) -> "Poly":
        """Formal partial derivative with respect to ``v``."""
        i = self._index(v)
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                ne = e[:i] + (k - 1,) + e[i + 1:]
                out[ne] = out.get(ne, 0) + c * k
        return Poly._raw(self.universe, {e: c for e, c in out.items() if c})

    def coefficient_poly(self, v_indices: Sequence[int], mono: Exps) -> "Poly":
        """Coefficient of the monomial ``mono`` in the variables at ``v_indices``."""
        out = {}
        for e, c in self.terms.items():
            if all(e[i] == m for i, m in zip(v_indices, mono)):
                ne = list(e)
                for i in v_indices:
                    ne[i] = 0
                out[tuple(ne)] = c
        return Poly._raw(self.universe, out)

    def leading(self, order: MonomialOrder):
        """Leading (exponents, coefficient) pair; ``None`` for zero."""
        if not self.terms:
            return None
        e = max(self.terms, key=order.key)
        return e, self.terms[e]

    def sorted_terms(self, order: MonomialOrder = GREVLEX):
        return sorted(self.terms.items(), key=lambda t: order.key(t[0]), reverse=True)

    def render(self, order: MonomialOrder = GREVLEX) -> str:
        """Canonical text: terms in decreasing order, coefficients as num/den."""
        if not self.terms:
            return "0"
        parts = []
        for exps, c in self.sorted_terms(order):
            mono = "*".join(
                str(v) if k == 1 else f"{v}^{k}" for v, k in zip(self.universe, exps) if k
            )
            mag = abs(c)
            cs = str(mag)
            if not mono:
                body = cs
            elif mag == 1:
                body = mono
            else:
                body = f"{cs}*{mono}"
            parts.append(("-" if c < 0 else "+", body))
        sign, body = parts[0]
        out = ("-" if sign == "-" else "") + body
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"Poly({self.render()!s} over {self._ustr()})"


def make_universe(*names: str) -> Tuple[VarId, ...]:
    """``make_universe("x", "y")`` -> ``(VarId('x'), VarId('y'))``."""
    return tuple(VarId(n) for n in names)


def gens(universe: Iterable[VarId]):
    universe = tuple(universe)
    return [Poly.var(universe, v) for v in universe]


def poly_arith(lhs: Poly, op: str, rhs: Poly) -> Poly:
    if op == "add":
        return lhs + rhs
    if op == "sub":
        return lhs - rhs
    if op == "mul":
        return lhs * rhs
    raise ValueError(f"unknown operation {op!r}")


def formal_partial(p: Poly, v: VarId) -> Poly:
    return p.partial(v)


def substitute(p: Poly, assignment: Mapping[VarId, Poly], universe=None) -> Poly:
    return p.substitute(assignment, universe)

"""Buchberger's algorithm and normal forms over the rationals."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .errors import ResourceExceeded, UniverseError
from .exactpoly import GREVLEX, MonomialOrder, Poly

DEFAULT_MAX_PAIRS = 100_000
DEFAULT_MAX_REDUCTIONS = 100_000


@dataclass
class Limits:
    max_pairs: int = DEFAULT_MAX_PAIRS
    max_reductions: int = DEFAULT_MAX_REDUCTIONS


DEFAULT_LIMITS = Limits()


def _divides(a, b):
    return all(x <= y for x, y in zip(a, b))


def _lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def _coprime(a, b):
    return all(not (x and y) for x, y in zip(a, b))


class _Reducer:
    """Term-by-term division by a list of (leading exps, dict terms) pairs."""

    def __init__(self, order: MonomialOrder, limits: Limits):
        self.key = order.key
        self.limits = limits
        self.steps = 0

    def reduce(self, terms: Dict, basis: List[Tuple[tuple, Fraction, Dict]], full=True):
        p = dict(terms)
        rem = {}
        key = self.key
        while p:
            lt = max(p, key=key)
            c = p[lt]
            for lm, lc, g in basis:
                if _divides(lm, lt):
                    self.steps += 1
                    if self.steps > self.limits.max_reductions:
                        raise ResourceExceeded(
                            f"normal form exceeded {self.limits.max_reductions} reduction steps"
                        )
                    q = c / lc
                    shift = tuple(x - y for x, y in zip(lt, lm))
                    for e, v in g.items():
                        ne = tuple(a + b for a, b in zip(e, shift))
                        s = p.get(ne, 0) - q * v
                        if s:
                            p[ne] = s
                        else:
                            p.pop(ne, None)
                    break
            else:
                rem[lt] = c
                del p[lt]
                if not full:
                    rem.update(p)
                    return rem
        return rem


def _monic(terms, key):
    lt = max(terms, key=key)
    c = terms[lt]
    return {e: v / c for e, v in terms.items()}


@dataclass(frozen=True)
class GroebnerBasis:
    """A Gröbner basis over a fixed universe and monomial order.

    ``generators`` are sorted by decreasing leading monomial; when
    ``reduced`` is set they are monic and mutually reduced, so the basis is
    the unique reduced basis of the ideal.
    """

    universe: Tuple
    generators: Tuple[Poly, ...]
    order: MonomialOrder = GREVLEX
    reduced: bool = True

    def _entries(self):
        out = []
        for g in self.generators:
            lm, lc = g.leading(self.order)
            out.append((lm, lc, g.terms))
        return out

    def normal_form(self, p: Poly, limits: Limits = DEFAULT_LIMITS) -> Poly:
        if p.universe != self.universe:
            raise UniverseError("polynomial and basis live over different universes")
        if not self.generators or not p.terms:
            return p
        rem = _Reducer(self.order, limits).reduce(p.terms, self._entries())
        return Poly._raw(self.universe, rem)

    def contains(self, p: Poly) -> bool:
        return self.normal_form(p).is_zero()

    def is_unit(self) -> bool:
        return any(g.is_constant() and not g.is_zero() for g in self.generators)

    def is_zero_ideal(self):
        return not self.generators

    def render(self):
        return "{" + ", ".join(g.render(self.order) for g in self.generators) + "}"


def buchberger(
    generators: Sequence[Poly],
    order: MonomialOrder = GREVLEX,
    universe=None,
    limits: Limits = DEFAULT_LIMITS,
) -> GroebnerBasis:
    """Reduced Gröbner basis of the ideal generated by ``generators``.

    Pairs are processed by the normal strategy (smallest lcm first, ties
    broken by the order and then by index) with the coprime and chain
    criteria.  The empty list presents the zero ideal, which needs an
    explicit ``universe``.
    """
    if universe is None:
        if not generators:
            raise UniverseError("the zero ideal needs an explicit universe")
        universe = generators[0].universe
    universe = tuple(universe)
    for g in generators:
        if g.universe != universe:
            raise UniverseError("ideal generators live over different universes")
    key = order.key
    reducer = _Reducer(order, limits)

    G: List[Dict] = []
    LM: List[tuple] = []
    pairs = set()
    pair_count = 0

    def add(terms):
        nonlocal pair_count
        terms = _monic(terms, key)
        G.append(terms)
        LM.append(max(terms, key=key))
        j = len(G) - 1
        for i in range(j):
            pairs.add((i, j))
            pair_count += 1
            if pair_count > limits.max_pairs:
                raise ResourceExceeded(f"pair queue exceeded {limits.max_pairs} pairs")

    def basis_entries():
        return [(LM[i], Fraction(1), G[i]) for i in range(len(G))]

    # seed in a canonical order so the result does not depend on input order
    seeds = sorted(
        (dict(g.terms) for g in generators if g.terms),
        key=lambda t: (key(max(t, key=key)), sorted((e, v) for e, v in t.items())),
        reverse=True,
    )
    for t in seeds:
        r = reducer.reduce(t, basis_entries())
        if r:
            add(r)

    while pairs:
        i, j = min(
            pairs,
            key=lambda ij: (sum(_lcm(LM[ij[0]], LM[ij[1]])), key(_lcm(LM[ij[0]], LM[ij[1]])), ij),
        )
        pairs.discard((i, j))
        a, b = LM[i], LM[j]
        if _coprime(a, b):
            continue
        lcm = _lcm(a, b)
        chain = False
        for k in range(len(G)):
            if k in (i, j) or not _divides(LM[k], lcm):
                continue
            ik = (min(i, k), max(i, k))
            jk = (min(j, k), max(j, k))
            if ik not in pairs and jk not in pairs:
                chain = True
                break
        if chain:
            continue
        s = {}
        for src, lm, sign in ((G[i], a, 1), (G[j], b, -1)):
            shift = tuple(x - y for x, y in zip(lcm, lm))
            for e, v in src.items():
                ne = tuple(p + q for p, q in zip(e, shift))
                val = s.get(ne, 0) + sign * v
                if val:
                    s[ne] = val
                else:
                    s.pop(ne, None)
        if not s:
            continue
        r = reducer.reduce(s, basis_entries())
        if r:
            add(r)

    # minimalize, then interreduce
    keep = []
    for i in range(len(G)):
        redundant = False
        for j in range(len(G)):
            if i == j:
                continue
            if _divides(LM[j], LM[i]) and (LM[j] != LM[i] or j < i):
                redundant = True
                break
        if not redundant:
            keep.append(i)
    minimal = [(LM[i], G[i]) for i in keep]
    final = []
    for idx, (lm, g) in enumerate(minimal):
        others = [(m, Fraction(1), h) for k, (m, h) in enumerate(minimal) if k != idx]
        r = reducer.reduce(g, others)
        final.append(Poly._raw(universe, _monic(r, key)))
    final.sort(key=lambda p: key(p.leading(order)[0]), reverse=True)
    return GroebnerBasis(universe, tuple(final), order, True)


def normal_form(p: Poly, basis: GroebnerBasis, limits: Limits = DEFAULT_LIMITS) -> Poly:
    return basis.normal_form(p, limits)


def s_polynomial(f: Poly, g: Poly, order: MonomialOrder) -> Poly:
    (a, ca), (b, cb) = f.leading(order), g.leading(order)
    lcm = _lcm(a, b)
    u = f.universe
    mf = Poly(u, {tuple(x - y for x, y in zip(lcm, a)): 1 / ca})
    mg = Poly(u, {tuple(x - y for x, y in zip(lcm, b)): 1 / cb})
    return mf * f - mg * g

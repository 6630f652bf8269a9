"""Complete topological rings presented as towers of quotient levels.

A :class:`TowerRing` produces, for each level ``n``, a finitely presented
quotient ``A_n`` (a :class:`LevelRing`) together with surjective transition
maps ``A_m -> A_n`` for ``m >= n``.  Every construction keeps the universes
nested (the variables of level ``n`` are among those of level ``m``) and the
transition fixes those variables, so a normal form at a low level is also a
valid lift to any higher one.

Elements (:class:`TowerElement`) are lazy: a promoter computes the level-n
representative on demand, the result is normal-formed and cached, and newly
computed levels are checked against cached neighbours.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .errors import CompatibilityError, PresentationError, UniverseError
from .exactpoly import GREVLEX, MonomialOrder, Poly, VarId
from .groebner import DEFAULT_LIMITS, GroebnerBasis, Limits, buchberger
from .linalg import SpanChecker


class LevelRing:
    """The quotient ``k[universe] / ideal`` at one level of a tower."""

    def __init__(self, level, universe, relations, order=GREVLEX, limits=DEFAULT_LIMITS):
        self.level = level
        self.universe = tuple(universe)
        self.order = order
        self.limits = limits
        rels = [r for r in relations if not r.is_zero()]
        if rels:
            self.basis = buchberger(rels, order, self.universe, limits)
        else:
            self.basis = GroebnerBasis(self.universe, (), order, True)

    def nf(self, p: Poly) -> Poly:
        if p.universe != self.universe:
            p = p.embed(self.universe)
        return self.basis.normal_form(p, self.limits)

    def contains(self, p: Poly) -> bool:
        return self.nf(p).is_zero()

    def var(self, v: VarId) -> Poly:
        return self.nf(Poly.var(self.universe, v))

    def const(self, c) -> Poly:
        return self.nf(Poly.const(self.universe, c))

    def is_zero_ring(self) -> bool:
        return self.basis.is_unit()

    def standard_monomials(self, max_degree: int) -> List[Poly]:
        """Monomials of degree <= max_degree that are their own normal form."""
        width = len(self.universe)
        lms = [g.leading(self.order)[0] for g in self.basis.generators]
        out = []
        for d in range(max_degree + 1):
            for combo in itertools.combinations_with_replacement(range(width), d):
                exps = [0] * width
                for i in combo:
                    exps[i] += 1
                exps = tuple(exps)
                if any(all(a <= b for a, b in zip(lm, exps)) for lm in lms):
                    continue
                out.append(Poly(self.universe, {exps: 1}))
        out.sort(key=lambda p: self.order.key(next(iter(p.terms))))
        return out

    def render(self):
        vars_ = ", ".join(map(str, self.universe))
        if not self.basis.generators:
            return f"Q[{vars_}]"
        return f"Q[{vars_}]/({', '.join(g.render(self.order) for g in self.basis.generators)})"


class TowerRing:
    """Base class for towers; subclasses supply universes, relations and generator images."""

    kind = "abstract"
    first_level = 0

    def __init__(self, limits: Limits = DEFAULT_LIMITS):
        self.limits = limits
        self.parents: Tuple["TowerRing", ...] = ()
        self._levels: Dict[int, LevelRing] = {}
        self._transitions: Dict[Tuple[int, int], Dict[VarId, Poly]] = {}
        self._generators: Dict[VarId, "TowerElement"] = {}
        self._coerced: Dict[int, Tuple["TowerElement", "TowerElement"]] = {}
        self._lock = threading.RLock()
        self.name: Optional[str] = None

    # -- to be provided by subclasses

    def universe(self, n: int) -> Tuple[VarId, ...]:
        raise NotImplementedError

    def relations(self, n: int) -> List[Poly]:
        raise NotImplementedError

    def order(self, n: int) -> MonomialOrder:
        return GREVLEX

    def gen_image(self, v: VarId, n: int) -> Poly:
        """Image of generator ``v`` in ``A_n`` (not necessarily normal-formed)."""
        raise NotImplementedError

    def has_generator(self, v: VarId) -> bool:
        raise NotImplementedError

    def generator_names(self) -> Dict[str, bool]:
        """Generator name -> whether it is an indexed family."""
        raise NotImplementedError

    def ideal_generators(self, m: int, extent: int = 8) -> List["TowerElement"]:
        """Elements generating the open ideal of level ``m`` (families truncated to ``extent``)."""
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError

    # -- shared machinery

    def level(self, n: int) -> LevelRing:
        if n < 0:
            raise ValueError("levels are non-negative")
        with self._lock:
            lv = self._levels.get(n)
            if lv is None:
                lv = LevelRing(n, self.universe(n), self.relations(n), self.order(n), self.limits)
                self._levels[n] = lv
            return lv

    def gen_rep(self, v: VarId, n: int) -> Poly:
        return self.level(n).nf(self.gen_image(v, n))

    def transition(self, m: int, n: int) -> Dict[VarId, Poly]:
        """The surjection ``A_m -> A_n`` as a variable assignment."""
        if m < n:
            raise ValueError(f"transition needs m >= n, got {m} < {n}")
        key = (m, n)
        with self._lock:
            tr = self._transitions.get(key)
            if tr is None:
                tr = {v: self.gen_rep(v, n) for v in self.universe(m)}
                self._transitions[key] = tr
            return tr

    def project(self, p: Poly, m: int, n: int) -> Poly:
        if m == n:
            return self.level(n).nf(p)
        if p.universe != self.universe(m):
            p = p.embed(self.universe(m))
        img = p.substitute(self.transition(m, n), self.universe(n))
        return self.level(n).nf(img)

    def lift(self, p: Poly, n: int, m: int) -> Poly:
        """Canonical lift of a level-n normal form to level m (universes are nested)."""
        return self.level(m).nf(p.embed(self.universe(m)))

    def element(self, promoter: Callable[[int], object], label: Optional[str] = None) -> "TowerElement":
        return TowerElement(self, promoter, label)

    def const(self, c) -> "TowerElement":
        c = Fraction(c)
        return TowerElement(self, lambda n: Poly.const(self.universe(n), c), str(c))

    def zero(self):
        return self.const(0)

    def one(self):
        return self.const(1)

    def generator(self, v: VarId) -> "TowerElement":
        if not self.has_generator(v):
            raise UniverseError(f"{v} is not a generator of this {self.kind} tower")
        with self._lock:
            g = self._generators.get(v)
            if g is None:
                g = TowerElement(self, lambda n, v=v: self.gen_image(v, n), str(v))
                self._generators[v] = g
            return g

    def resolve(self, name: str, index: Optional[int] = None) -> VarId:
        names = self.generator_names()
        if name not in names:
            raise UniverseError(f"{name} is not a generator name of this tower")
        if names[name] and index is None:
            raise UniverseError(f"family {name} needs an index")
        if not names[name] and index is not None:
            raise UniverseError(f"{name} is not an indexed family")
        return VarId(name, index)

    def embeds(self, other: "TowerRing") -> bool:
        return other is self or any(p.embeds(other) for p in self.parents)

    def coerce(self, elem: "TowerElement") -> "TowerElement":
        """View an element of an ancestor tower (quotient/localization/tensor factor) here."""
        if elem.parent is self:
            return elem
        with self._lock:
            hit = self._coerced.get(id(elem))
            if hit is not None and hit[0] is elem:
                return hit[1]
        for p in self.parents:
            if p.embeds(elem.parent):
                inner = p.coerce(elem)
                out = TowerElement(
                    self, lambda n, e=inner: e.at(n).embed(self.universe(n)), elem.label
                )
                with self._lock:
                    self._coerced[id(elem)] = (elem, out)
                return out
        raise UniverseError(
            f"element of a {elem.parent.kind} tower cannot be viewed in this {self.kind} tower"
        )

    def generators_at(self, n: int) -> List[VarId]:
        return list(self.universe(n))

    def audit_transitions(self, depth: int) -> List[str]:
        """Check identity, composition and surjectivity on generators; returns failures."""
        failures = []
        for n in range(depth + 1):
            for v in self.universe(n):
                if self.project(self.level(n).var(v), n, n) != self.level(n).var(v):
                    failures.append(f"p[{n},{n}] moves {v}")
        for n in range(depth + 1):
            for m in range(n, depth + 1):
                missing = set(self.universe(n)) - set(self.universe(m))
                if missing:
                    failures.append(f"level {n} generators {sorted(map(str, missing))} have no preimage at level {m}")
                    continue
                for v in self.universe(n):
                    if self.project(self.level(m).var(v), m, n) != self.level(n).var(v):
                        failures.append(f"p[{m},{n}] does not send {v} to {v}")
                for l in range(m, depth + 1):
                    for v in self.universe(l):
                        g = self.level(l).var(v)
                        direct = self.project(g, l, n)
                        two_step = self.project(self.project(g, l, m), m, n)
                        if direct != two_step:
                            failures.append(f"p[{m},{n}]∘p[{l},{m}] != p[{l},{n}] on {v}")
        return failures

    def __repr__(self):
        return f"<{self.kind} tower {self.name or ''}>".replace(" >", ">")


# ------------------------------------------------------------------ kinds


class DiscreteTower(TowerRing):
    """A finitely presented algebra with the discrete topology: every level equal."""

    kind = "discrete"

    def __init__(self, variables: Sequence[VarId], relations: Sequence[Poly] = (), limits=DEFAULT_LIMITS):
        super().__init__(limits)
        self._universe = tuple(variables)
        self._relations = [r.embed(self._universe) for r in relations]

    def universe(self, n):
        return self._universe

    def relations(self, n):
        return list(self._relations)

    def gen_image(self, v, n):
        return Poly.var(self._universe, v)

    def has_generator(self, v):
        return v in self._universe

    def generator_names(self):
        return {v.name: v.index is not None for v in self._universe}

    def ideal_generators(self, m, extent=8):
        return []

    def describe(self):
        return {
            "kind": self.kind,
            "vars": [str(v) for v in self._universe],
            "relations": [r.render() for r in self._relations],
        }


class AdicTower(TowerRing):
    """``R`` completed along ``J``: level n is ``R / J^n`` (level 0 is the zero ring)."""

    kind = "adic"
    first_level = 1

    def __init__(self, variables, ideal, relations=(), limits=DEFAULT_LIMITS):
        super().__init__(limits)
        self._universe = tuple(variables)
        self._base = [r.embed(self._universe) for r in relations]
        self._J = [g.embed(self._universe) for g in ideal if not g.is_zero()]
        if not self._J:
            raise PresentationError("adic tower needs a nonzero ideal")
        probe = buchberger(self._base + self._J, GREVLEX, self._universe, limits)
        if probe.is_unit():
            raise PresentationError("adic ideal is not proper")
        self._powers: Dict[int, List[Poly]] = {}

    def _power_gens(self, n):
        if n not in self._powers:
            if n == 0:
                self._powers[n] = [Poly.const(self._universe, 1)]
            else:
                gens = []
                for combo in itertools.combinations_with_replacement(range(len(self._J)), n):
                    p = Poly.const(self._universe, 1)
                    for i in combo:
                        p = p * self._J[i]
                    gens.append(p)
                self._powers[n] = gens
        return self._powers[n]

    def universe(self, n):
        return self._universe

    def relations(self, n):
        return self._base + self._power_gens(n)

    def gen_image(self, v, n):
        return Poly.var(self._universe, v)

    def has_generator(self, v):
        return v in self._universe

    def generator_names(self):
        return {v.name: v.index is not None for v in self._universe}

    def ideal_generators(self, m, extent=8):
        return [
            self.element(lambda n, p=p: p, p.render()) for p in self._power_gens(m)
        ]

    def describe(self):
        return {
            "kind": self.kind,
            "vars": [str(v) for v in self._universe],
            "ideal": [g.render() for g in self._J],
            "relations": [r.render() for r in self._base],
        }


Center = Union[int, Fraction, Callable[[int], Fraction]]


class CutoffTower(TowerRing):
    """Countably many variables ``X[i]``; level n keeps ``X[0..width(n)-1]``.

    The open ideal of level n is generated by ``X[i] - c_i`` for the dropped
    indices, so the transition substitutes the center constant for them.
    """

    kind = "cutoff"
    first_level = 1

    def __init__(self, family: str, centers: Center = 0, width: Callable[[int], int] = None, limits=DEFAULT_LIMITS):
        super().__init__(limits)
        self.family = family
        self._center = centers if callable(centers) else (lambda i, c=Fraction(centers): c)
        self._centers_spec = None if callable(centers) else Fraction(centers)
        self._width = width or (lambda n: n)
        self._universes: Dict[int, Tuple[VarId, ...]] = {}

    def width(self, n):
        return self._width(n)

    def center(self, i) -> Fraction:
        return Fraction(self._center(i))

    def universe(self, n):
        u = self._universes.get(n)
        if u is None:
            w = self.width(n)
            if n > 0 and w < self.width(n - 1):
                raise PresentationError("cutoff widths must be non-decreasing")
            u = tuple(VarId(self.family, i) for i in range(w))
            self._universes[n] = u
        return u

    def relations(self, n):
        # level 0 is the quotient by the whole ring, like the adic kind
        if n == 0 and self.first_level == 1:
            return [Poly.const(self.universe(0), 1)]
        return []

    def gen_image(self, v, n):
        u = self.universe(n)
        if v.index < len(u):
            return Poly.var(u, v)
        return Poly.const(u, self.center(v.index))

    def has_generator(self, v):
        return v.name == self.family and v.index is not None

    def generator_names(self):
        return {self.family: True}

    def ideal_generators(self, m, extent=8):
        start = self.width(m)
        out = []
        for i in range(start, start + extent):
            v = VarId(self.family, i)
            c = self.center(i)
            out.append(self.generator(v) - c)
        return out

    def describe(self):
        return {
            "kind": self.kind,
            "family": self.family,
            "centers": str(self._centers_spec) if self._centers_spec is not None else "custom",
        }


class DualCoordinateTower(CutoffTower):
    """``lim Sym(W_n^dual)`` for an exhaustion ``W_0 ⊆ W_1 ⊆ ...`` of an algebra R.

    ``X[i]`` is the coordinate dual to the i-th element of a basis of R that
    extends a basis of every ``W_n``; level n keeps the ``dim W_n`` first
    coordinates and sends the others to 0.
    """

    kind = "dual_coordinate"
    first_level = 0

    def __init__(self, algebra: LevelRing, exhaustion: "Exhaustion", family="X", limits=DEFAULT_LIMITS):
        self.algebra = algebra
        self.exhaustion = exhaustion
        super().__init__(family, 0, width=exhaustion.dim, limits=limits)

    def basis_element(self, i) -> Poly:
        return self.exhaustion.basis_element(i)

    def coordinates(self, f: Poly, n: int) -> List[Fraction]:
        """Values ``X[i](f)`` for i < dim W_n; ``f`` must lie in ``W_n``."""
        return self.exhaustion.coordinates(self.algebra.nf(f.embed(self.algebra.universe)), n)

    def describe(self):
        return {
            "kind": self.kind,
            "family": self.family,
            "algebra": self.algebra.render(),
            "exhaustion": self.exhaustion.label,
        }


class Exhaustion:
    """Nested finite-dimensional subspaces of an algebra, optionally made stable under a map.

    ``generate(n)`` lists spanning vectors of ``V_n``; when ``closure`` is
    given, ``W_n`` is the span of all iterates ``closure^k(v)`` for ``v`` in
    ``V_n``.  A single basis is grown so that its first ``dim W_n`` entries
    span ``W_n`` for every n.
    """

    def __init__(self, algebra: LevelRing, generate: Callable[[int], List[Poly]], closure=None, label="degree", max_iter=64):
        self.algebra = algebra
        self.generate = generate
        self.closure = closure
        self.label = label
        self.max_iter = max_iter
        self.basis: List[Poly] = []
        self._dims: List[int] = []
        self._cols: Dict[tuple, int] = {}
        self._span = SpanChecker(0)
        self._lock = threading.RLock()

    def _vec(self, p: Poly):
        out = {}
        for e, c in p.terms.items():
            if e not in self._cols:
                self._cols[e] = len(self._cols)
            out[self._cols[e]] = c
        return out

    def _extend(self, n):
        from .errors import NotLocallyNilpotent

        vs = [self.algebra.nf(v.embed(self.algebra.universe)) for v in self.generate(n)]
        if n > 0:
            # nestedness: V_{n-1} must lie in V_n
            probe = SpanChecker(0)
            for v in vs:
                probe.add(self._vec(v))
            for v in self.generate(n - 1):
                v = self.algebra.nf(v.embed(self.algebra.universe))
                if not probe.contains(self._vec(v)):
                    raise PresentationError(f"exhaustion is not nested at level {n}")
        for v in vs:
            cur = v
            for _ in range(self.max_iter):
                if cur.is_zero():
                    break
                if self._span.add(self._vec(cur)):
                    lead = cur.leading(self.algebra.order)[1]
                    self.basis.append(cur.scale(1 / lead))
                if self.closure is None:
                    break
                cur = self.algebra.nf(self.closure(cur))
            else:
                raise NotLocallyNilpotent(
                    f"iterates of {v.render()} did not vanish within {self.max_iter} steps"
                )
        self._dims.append(len(self.basis))

    def dim(self, n) -> int:
        with self._lock:
            while len(self._dims) <= n:
                self._extend(len(self._dims))
            return self._dims[n]

    def basis_element(self, i) -> Poly:
        with self._lock:
            n = 0
            while self.dim(n) <= i:
                n += 1
                if n > 10_000:
                    raise PresentationError("exhaustion does not grow")
            return self.basis[i]

    def coordinates(self, f: Poly, n: int) -> List[Fraction]:
        from .linalg import rref

        d = self.dim(n)
        cols = list(self.basis[:d])
        monos = sorted({e for p in cols + [f] for e in p.terms})
        rows = [[p.terms.get(e, Fraction(0)) for p in cols] + [f.terms.get(e, Fraction(0))] for e in monos]
        red, piv = rref(rows)
        if d in piv:
            raise UniverseError(f"{f.render()} does not lie in W_{n}")
        out = [Fraction(0)] * d
        for row, p in zip(red, piv):
            out[p] = row[d]
        return out


class QuotientTower(TowerRing):
    kind = "quotient"

    def __init__(self, base: TowerRing, ideal_gens: Sequence["TowerElement"], limits=None):
        super().__init__(limits or base.limits)
        self.base = base
        self.parents = (base,)
        self.gens = [base.coerce(g) for g in ideal_gens]
        self.first_level = base.first_level

    def universe(self, n):
        return self.base.universe(n)

    def order(self, n):
        return self.base.order(n)

    def relations(self, n):
        return list(self.base.level(n).basis.generators) + [g.at(n) for g in self.gens]

    def gen_image(self, v, n):
        return self.base.gen_image(v, n)

    def has_generator(self, v):
        return self.base.has_generator(v)

    def generator_names(self):
        return self.base.generator_names()

    def ideal_generators(self, m, extent=8):
        return [self.coerce(g) for g in self.base.ideal_generators(m, extent)]

    def describe(self):
        return {
            "kind": self.kind,
            "base": self.base.describe(),
            "ideal": [g.label or "?" for g in self.gens],
        }


class TensorTower(TowerRing):
    kind = "tensor"

    def __init__(self, left: TowerRing, right: TowerRing, limits=None):
        super().__init__(limits or left.limits)
        clash = set(left.generator_names()) & set(right.generator_names())
        if clash:
            raise UniverseError(f"tensor factors share generator names {sorted(clash)}")
        self.left, self.right = left, right
        self.parents = (left, right)
        self.first_level = max(left.first_level, right.first_level)

    def universe(self, n):
        return self.left.universe(n) + self.right.universe(n)

    def relations(self, n):
        u = self.universe(n)
        return [g.embed(u) for g in self.left.level(n).basis.generators] + [
            g.embed(u) for g in self.right.level(n).basis.generators
        ]

    def gen_image(self, v, n):
        side = self.left if self.left.has_generator(v) else self.right
        return side.gen_image(v, n).embed(self.universe(n))

    def has_generator(self, v):
        return self.left.has_generator(v) or self.right.has_generator(v)

    def generator_names(self):
        return {**self.left.generator_names(), **self.right.generator_names()}

    def ideal_generators(self, m, extent=8):
        return [self.coerce(g) for g in self.left.ideal_generators(m, extent)] + [
            self.coerce(g) for g in self.right.ideal_generators(m, extent)
        ]

    def describe(self):
        return {"kind": self.kind, "left": self.left.describe(), "right": self.right.describe()}


class LocalizedTower(TowerRing):
    """Levelwise localization ``A_n[w] / (ideal_n + (w f_n - 1))``."""

    kind = "localized"

    def __init__(self, base: TowerRing, f: "TowerElement", limits=None):
        super().__init__(limits or base.limits)
        self.base = base
        self.parents = (base,)
        self.f = base.coerce(f)
        taken = set(base.generator_names())
        name = "w"
        k = 1
        while name in taken:
            name = f"w{k}"
            k += 1
        self.w = VarId(name)
        self.first_level = base.first_level

    def universe(self, n):
        return (self.w,) + self.base.universe(n)

    def order(self, n):
        return MonomialOrder("elim", 1)

    def relations(self, n):
        u = self.universe(n)
        rels = [g.embed(u) for g in self.base.level(n).basis.generators]
        rels.append(Poly.var(u, self.w) * self.f.at(n).embed(u) - 1)
        return rels

    def gen_image(self, v, n):
        if v == self.w:
            return Poly.var(self.universe(n), v)
        return self.base.gen_image(v, n).embed(self.universe(n))

    def has_generator(self, v):
        return v == self.w or self.base.has_generator(v)

    def generator_names(self):
        return {**self.base.generator_names(), self.w.name: False}

    def ideal_generators(self, m, extent=8):
        return [self.coerce(g) for g in self.base.ideal_generators(m, extent)]

    @property
    def inverse(self) -> "TowerElement":
        return self.generator(self.w)

    def describe(self):
        return {"kind": self.kind, "base": self.base.describe(), "at": self.f.label or "?"}


# --------------------------------------------------------------- elements


def _wrap(label, sym, right=False):
    compound = " " in label.strip() or (label.lstrip("-") != label and sym != "+")
    if sym == "+" or (sym == "-" and not right):
        return label
    return f"({label})" if compound else label


class TowerElement:
    """A compatible family of level representatives, computed lazily."""

    def __init__(self, parent: TowerRing, promoter: Callable[[int], object], label: Optional[str] = None, audit: bool = True):
        self.parent = parent
        self.promoter = promoter
        self.label = label
        self.audit = audit
        self.cache: Dict[int, Poly] = {}
        self._lock = threading.RLock()

    def at(self, n: int) -> Poly:
        with self._lock:
            hit = self.cache.get(n)
            if hit is not None:
                return hit
        raw = self.promoter(n)
        lv = self.parent.level(n)
        if not isinstance(raw, Poly):
            raw = Poly.const(lv.universe, raw)
        rep = lv.nf(raw)
        with self._lock:
            if self.audit:
                self._check(n, rep)
            self.cache[n] = rep
        return rep

    def _check(self, n, rep):
        above = [m for m in self.cache if m > n]
        below = [m for m in self.cache if m < n]
        if above:
            m = min(above)
            if self.parent.project(self.cache[m], m, n) != rep:
                raise CompatibilityError(
                    f"{self.label or 'element'}: level {m} representative does not project to level {n}",
                    upper=m,
                    lower=n,
                )
        if below:
            m = max(below)
            if self.parent.project(rep, n, m) != self.cache[m]:
                raise CompatibilityError(
                    f"{self.label or 'element'}: level {n} representative does not project to level {m}",
                    upper=n,
                    lower=m,
                )

    # arithmetic; the result lives on whichever parent embeds the other

    def _pair(self, other):
        if isinstance(other, (int, Fraction)):
            return self, self.parent.const(other)
        if not isinstance(other, TowerElement):
            return None
        if other.parent is self.parent:
            return self, other
        if self.parent.embeds(other.parent):
            return self, self.parent.coerce(other)
        if other.parent.embeds(self.parent):
            return other.parent.coerce(self), other
        raise UniverseError("elements belong to unrelated towers")

    def _binary(self, other, fn, sym, swap=False):
        pair = self._pair(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        if swap:
            a, b = b, a
        label = None
        if a.label is not None and b.label is not None:
            label = f"{_wrap(a.label, sym)} {sym} {_wrap(b.label, sym, right=True)}" if sym != "*" else f"{_wrap(a.label, sym)}*{_wrap(b.label, sym)}"
        return TowerElement(a.parent, lambda n: fn(a.at(n), b.at(n)), label)

    def __add__(self, other):
        return self._binary(other, lambda x, y: x + y, "+")

    def __radd__(self, other):
        return self._binary(other, lambda x, y: x + y, "+", swap=True)

    def __sub__(self, other):
        return self._binary(other, lambda x, y: x - y, "-")

    def __rsub__(self, other):
        return self._binary(other, lambda x, y: x - y, "-", swap=True)

    def __mul__(self, other):
        return self._binary(other, lambda x, y: x * y, "*")

    def __rmul__(self, other):
        return self._binary(other, lambda x, y: x * y, "*", swap=True)

    def __neg__(self):
        return TowerElement(self.parent, lambda n: -self.at(n), f"-({self.label})" if self.label else None)

    def __pow__(self, k):
        return TowerElement(self.parent, lambda n: self.at(n) ** k, f"({self.label})^{k}" if self.label else None)

    def is_zero_to(self, depth: int) -> bool:
        return all(self.at(n).is_zero() for n in range(depth + 1))

    def __repr__(self):
        return f"<element {self.label or '?'} of {self.parent!r}>"


# ------------------------------------------------------------- operations


def _as_polys(items, universe):
    from .expr import parse_poly

    out = []
    for it in items:
        out.append(parse_poly(it, universe) if isinstance(it, str) else it.embed(universe))
    return out


def _vars(names):
    out = []
    for n in names:
        out.append(n if isinstance(n, VarId) else VarId(n))
    return tuple(out)


def make_tower(spec: dict, limits: Limits = DEFAULT_LIMITS) -> TowerRing:
    """Build a tower from a construction descriptor.

    ``{"kind": "adic", "vars": ["u"], "ideal": ["u"]}``,
    ``{"kind": "cutoff", "family": "X", "centers": 0}``,
    ``{"kind": "discrete", "vars": ["x"], "relations": []}``,
    ``{"kind": "dual_coordinate", "vars": ["x"], "relations": [], "exhaustion": <callable or "degree">}``.
    """
    kind = spec.get("kind")
    if kind == "adic":
        u = _vars(spec["vars"])
        return AdicTower(u, _as_polys(spec["ideal"], u), _as_polys(spec.get("relations", ()), u), limits)
    if kind == "cutoff":
        return CutoffTower(spec.get("family", "X"), spec.get("centers", 0), limits=limits)
    if kind == "discrete":
        u = _vars(spec.get("vars", ()))
        return DiscreteTower(u, _as_polys(spec.get("relations", ()), u), limits)
    if kind in ("dual_coordinate", "dual"):
        u = _vars(spec["vars"])
        algebra = LevelRing(0, u, _as_polys(spec.get("relations", ()), u), GREVLEX, limits)
        ex = spec.get("exhaustion", "degree")
        gen = degree_exhaustion(algebra) if ex == "degree" else ex
        exh = Exhaustion(algebra, gen, closure=spec.get("closure"), label="degree" if ex == "degree" else "custom")
        return DualCoordinateTower(algebra, exh, spec.get("family", "X"), limits)
    raise PresentationError(f"unknown tower kind {kind!r}")


def degree_exhaustion(algebra: LevelRing):
    """V_n = span of standard monomials of degree <= n."""

    def gen(n):
        return algebra.standard_monomials(n)

    return gen


def quotient_tower(T: TowerRing, ideal_gens: Sequence[TowerElement]) -> TowerRing:
    return QuotientTower(T, ideal_gens)


def tensor_tower(T1: TowerRing, T2: TowerRing) -> TowerRing:
    return TensorTower(T1, T2)


def localization_tower(T: TowerRing, f: TowerElement) -> LocalizedTower:
    return LocalizedTower(T, f)


@dataclass
class Comparison:
    equal_to_depth: bool
    first_divergence_level: Optional[int]
    metric: Fraction
    depth: int

    def as_dict(self):
        return {
            "equal_to_depth": self.equal_to_depth,
            "first_divergence_level": self.first_divergence_level,
            "metric": str(self.metric),
            "depth": self.depth,
        }


def element_compare(a: TowerElement, b: TowerElement, depth: int) -> Comparison:
    """Compare two elements level by level up to ``depth``.

    The distance is ``1/2^k`` where ``k`` is the last level at which the two
    agree (so the difference lies in the k-th open ideal but not the next);
    divergence already at level 0 gives distance 1.
    """
    a, b = a._pair(b)
    for n in range(depth + 1):
        if a.at(n) != b.at(n):
            metric = Fraction(1) if n == 0 else Fraction(1, 2 ** (n - 1))
            return Comparison(False, n, metric, depth)
    return Comparison(True, None, Fraction(0), depth)


@dataclass
class LocalizationVerdict:
    levels: List[Tuple[int, bool]]  # (level, localized level is the zero ring)
    zero_to_depth: bool
    tower: LocalizedTower = field(repr=False, default=None)

    def as_dict(self):
        return {
            "levels": [{"level": n, "zero": z} for n, z in self.levels],
            "verdict": "zero" if self.zero_to_depth else "nonzero",
        }


def is_zero_localization(T: TowerRing, f: TowerElement, depth: int) -> LocalizationVerdict:
    L = localization_tower(T, f)
    levels = [(n, L.level(n).is_zero_ring()) for n in range(T.first_level, depth + 1)]
    return LocalizationVerdict(levels, all(z for _, z in levels), L)

"""Restricted power series over a tower, stored as one polynomial in the parameters per level.

At level n a series is a finite map from parameter multi-indices to level-n
normal forms.  Because each level is a polynomial, coefficient decay is built
into the representation.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from typing import Callable, Dict, Mapping, Optional, Sequence, Tuple, Union

from .errors import CompatibilityError, UniverseError
from .exactpoly import GREVLEX, Poly, VarId
from .tower import TowerElement, TowerRing

LevelData = Dict[Tuple[int, ...], Poly]

PRIMES = ("T", "T'", "T''")


def _add_into(acc: LevelData, key, p: Poly):
    cur = acc.get(key)
    s = p if cur is None else cur + p
    if s.is_zero():
        acc.pop(key, None)
    else:
        acc[key] = s


class RestrictedSeries:
    """An element of ``A{T_1..T_r}``; ``level_fn(n)`` returns a dict or a Poly over universe+params."""

    def __init__(self, base: TowerRing, params: Sequence[str], level_fn: Callable[[int], object], label=None):
        self.base = base
        self.params = tuple(params)
        if len(set(self.params)) != len(self.params):
            raise UniverseError("repeated series parameter")
        clash = set(self.params) & set(base.generator_names())
        if clash:
            raise UniverseError(f"series parameters {sorted(clash)} collide with tower generators")
        self.level_fn = level_fn
        self.label = label
        self.cache: Dict[int, LevelData] = {}
        self._lock = threading.RLock()

    # -- level data

    def ext_universe(self, n):
        return self.base.universe(n) + tuple(VarId(p) for p in self.params)

    def _split(self, p: Poly, n) -> LevelData:
        """Group a Poly over universe+params by parameter exponents and normal-form each coefficient."""
        u = self.base.universe(n)
        if p.universe != self.ext_universe(n):
            p = p.embed(self.ext_universe(n))
        k = len(u)
        groups: Dict[tuple, dict] = {}
        for e, c in p.terms.items():
            groups.setdefault(e[k:], {})[e[:k]] = c
        lv = self.base.level(n)
        out = {}
        for key, terms in groups.items():
            q = lv.nf(Poly._raw(u, terms))
            if not q.is_zero():
                out[key] = q
        return out

    def _normalize(self, raw, n) -> LevelData:
        if isinstance(raw, Poly):
            return self._split(raw, n)
        lv = self.base.level(n)
        out = {}
        for key, q in raw.items():
            if len(key) != len(self.params):
                raise UniverseError("multi-index length does not match the parameters")
            if not isinstance(q, Poly):
                q = Poly.const(lv.universe, q)
            q = lv.nf(q)
            if not q.is_zero():
                _add_into(out, tuple(key), q)
        return out

    def at(self, n: int) -> LevelData:
        with self._lock:
            hit = self.cache.get(n)
            if hit is not None:
                return hit
        data = self._normalize(self.level_fn(n), n)
        with self._lock:
            self._check(n, data)
            self.cache[n] = data
        return data

    def _project(self, data: LevelData, m, n) -> LevelData:
        out = {}
        for key, q in data.items():
            r = self.base.project(q, m, n)
            if not r.is_zero():
                out[key] = r
        return out

    def _check(self, n, data):
        above = [m for m in self.cache if m > n]
        below = [m for m in self.cache if m < n]
        if above:
            m = min(above)
            if self._project(self.cache[m], m, n) != data:
                raise CompatibilityError(f"series level {m} does not project to level {n}", upper=m, lower=n)
        if below:
            m = max(below)
            if self._project(data, n, m) != self.cache[m]:
                raise CompatibilityError(f"series level {n} does not project to level {m}", upper=n, lower=m)

    def as_poly(self, n) -> Poly:
        u = self.ext_universe(n)
        k = len(self.base.universe(n))
        terms = {}
        for key, q in self.at(n).items():
            for e, c in q.terms.items():
                terms[e + key] = c
        return Poly._raw(u, terms)

    def coefficient(self, I, n) -> Poly:
        if isinstance(I, int):
            I = (I,)
        I = tuple(I)
        if len(I) != len(self.params):
            raise UniverseError("multi-index length does not match the parameters")
        return self.at(n).get(I, Poly.zero(self.base.universe(n)))

    def coefficient_element(self, I) -> TowerElement:
        return TowerElement(self.base, lambda n: self.coefficient(I, n), f"coeff {I}")

    def t_degree(self, n) -> int:
        data = self.at(n)
        return max((sum(k) for k in data), default=-1)

    def render(self, n) -> str:
        data = self.at(n)
        if not data:
            return "0"
        parts = []
        for key in sorted(data, key=lambda k: (sum(k), [-e for e in k])):
            mono = "*".join(
                p if e == 1 else f"{p}^{e}" for p, e in zip(self.params, key) if e
            )
            coeff = data[key].render(self.base.order(n))
            if not mono:
                parts.append(f"({coeff})")
            elif coeff == "1":
                parts.append(mono)
            else:
                parts.append(f"({coeff})*{mono}")
        return " + ".join(parts)

    def equal_at(self, other: "RestrictedSeries", n) -> bool:
        a, b = _align(self, other)
        return a.at(n) == b.at(n)

    # -- arithmetic

    def _lift(self, other):
        if isinstance(other, RestrictedSeries):
            return _align(self, other)
        if isinstance(other, (int, Fraction)):
            return self, constant_embed(self.base.const(other), self.params)
        if isinstance(other, TowerElement):
            e = self.base.coerce(other)
            return self, constant_embed(e, self.params)
        return None

    def _combine(self, other, op, swap=False):
        pair = self._lift(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        if swap:
            a, b = b, a
        return series_arith(a, op, b)

    def __add__(self, other):
        return self._combine(other, "add")

    def __radd__(self, other):
        return self._combine(other, "add", True)

    def __sub__(self, other):
        return self._combine(other, "sub")

    def __rsub__(self, other):
        return self._combine(other, "sub", True)

    def __mul__(self, other):
        return self._combine(other, "mul")

    def __rmul__(self, other):
        return self._combine(other, "mul", True)

    def __neg__(self):
        return RestrictedSeries(self.base, self.params, lambda n: {k: -q for k, q in self.at(n).items()})

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative power")

        def level(n):
            acc = {tuple(0 for _ in self.params): Poly.const(self.base.universe(n), 1)}
            for _ in range(k):
                acc = _mul(acc, self.at(n), self.base.level(n))
            return acc

        return RestrictedSeries(self.base, self.params, level)

    def __repr__(self):
        return f"<series in {','.join(self.params)} over {self.base!r}>"


def _align(a: RestrictedSeries, b: RestrictedSeries):
    if a.params != b.params:
        raise UniverseError(f"parameter lists differ: {a.params} vs {b.params}")
    if a.base is b.base:
        return a, b
    if a.base.embeds(b.base):
        return a, coerce_series(b, a.base)
    if b.base.embeds(a.base):
        return coerce_series(a, b.base), b
    raise UniverseError("series over unrelated towers")


def coerce_series(s: RestrictedSeries, target: TowerRing) -> RestrictedSeries:
    """View a series over an ancestor tower inside ``target`` (coefficientwise)."""
    if s.base is target:
        return s
    cache = {}

    def coeff_elem(I):
        if I not in cache:
            cache[I] = target.coerce(s.coefficient_element(I))
        return cache[I]

    def level(n):
        return {I: coeff_elem(I).at(n) for I in s.at(n)}

    return RestrictedSeries(target, s.params, level, s.label)


def _mul(x: LevelData, y: LevelData, lv) -> LevelData:
    out: LevelData = {}
    for ka, qa in x.items():
        for kb, qb in y.items():
            key = tuple(i + j for i, j in zip(ka, kb))
            _add_into(out, key, qa * qb)
    return {k: lv.nf(q) for k, q in out.items() if not lv.nf(q).is_zero()}


def series_arith(lhs: RestrictedSeries, op: str, rhs: RestrictedSeries) -> RestrictedSeries:
    lhs, rhs = _align(lhs, rhs)
    base = lhs.base
    if op == "mul":
        return RestrictedSeries(base, lhs.params, lambda n: _mul(lhs.at(n), rhs.at(n), base.level(n)))
    if op not in ("add", "sub"):
        raise ValueError(f"unknown series operation {op!r}")
    sign = 1 if op == "add" else -1

    def level(n):
        out = dict(lhs.at(n))
        for k, q in rhs.at(n).items():
            _add_into(out, k, q if sign == 1 else -q)
        return out

    return RestrictedSeries(base, lhs.params, level)


def coefficient(s: RestrictedSeries, I, n) -> Poly:
    return s.coefficient(I, n)


def constant_embed(a: TowerElement, params: Sequence[str] = ("T",)) -> RestrictedSeries:
    """The constant series ``i0(a)``."""
    zero = tuple(0 for _ in params)
    return RestrictedSeries(a.parent, params, lambda n: {zero: a.at(n)}, a.label)


def param_series(base: TowerRing, name: str = "T", params: Sequence[str] = None) -> RestrictedSeries:
    params = tuple(params or (name,))
    if name not in params:
        raise UniverseError(f"{name} is not among {params}")
    key = tuple(1 if p == name else 0 for p in params)
    return RestrictedSeries(base, params, lambda n: {key: Poly.const(base.universe(n), 1)}, name)


def from_coefficients(base: TowerRing, coeffs: Callable[[int], Sequence[TowerElement]], param="T") -> RestrictedSeries:
    """One-parameter series with ``coeffs(n)`` the list of coefficients needed at level n."""

    def level(n):
        return {(i,): c.at(n) for i, c in enumerate(coeffs(n))}

    return RestrictedSeries(base, (param,), level)


# ----------------------------------------------------------- Hopf maps


def substitute_params(
    s: RestrictedSeries,
    new_params: Sequence[str],
    assignment: Mapping[str, Callable[[int], Poly]],
) -> RestrictedSeries:
    """Substitute each old parameter by a level-dependent Poly over base universe + new params."""
    new_params = tuple(new_params)
    for p in s.params:
        if p not in assignment:
            raise UniverseError(f"no image given for parameter {p}")
    probe = RestrictedSeries(s.base, new_params, lambda n: {})

    def level(n):
        src = s.as_poly(n)
        tgt_u = probe.ext_universe(n)
        amap = {v: Poly.var(tgt_u, v) for v in s.base.universe(n)}
        for p in s.params:
            img = assignment[p](n)
            if not isinstance(img, Poly):
                img = Poly.const(tgt_u, img)
            amap[VarId(p)] = img.embed(tgt_u)
        return src.substitute(amap, tgt_u)

    return RestrictedSeries(s.base, new_params, level)


def _param_image(base, params, poly_fn):
    """Helper producing a per-level Poly over universe(n)+params from ``poly_fn(universe)``."""

    def img(n):
        u = base.universe(n) + tuple(VarId(p) for p in params)
        return poly_fn(u, n)

    return img


def _resolve_subset(s: RestrictedSeries, J):
    if J is None:
        return list(s.params)
    out = []
    for j in J:
        if isinstance(j, int):
            if not 0 <= j < len(s.params):
                raise UniverseError(f"parameter index {j} out of range")
            out.append(s.params[j])
        else:
            if j not in s.params:
                raise UniverseError(f"unknown parameter {j}")
            out.append(j)
    return out


def _fresh_param(params):
    for p in PRIMES + tuple(f"T{i}" for i in range(3, 10)):
        if p not in params:
            return p
    raise UniverseError("too many series parameters")


def hopf_map(s: RestrictedSeries, which: str, arg=None, *, param: Optional[str] = None, new: Optional[str] = None):
    """Apply a structure map of the parameter Hopf algebra.

    ``which`` is one of comultiply, counit, coinvert, diagonal, scale,
    eval_at, eval_ones.  ``param`` selects the parameter acted on where that
    matters (default: the first); ``new`` names the parameter added by
    comultiply.  Maps that remove every parameter return a TowerElement.
    """
    base = s.base
    params = s.params

    def ident(p):
        return _param_image(base, out_params, lambda u, n, p=p: Poly.var(u, VarId(p)))

    if which == "comultiply":
        p = param or params[0]
        if p not in params:
            raise UniverseError(f"unknown parameter {p}")
        q = new or _fresh_param(params)
        if q in params:
            raise UniverseError(f"parameter {q} already present")
        out_params = params + (q,)
        amap = {x: ident(x) for x in params}
        amap[p] = _param_image(base, out_params, lambda u, n: Poly.var(u, VarId(p)) + Poly.var(u, VarId(q)))
        return substitute_params(s, out_params, amap)

    if which == "coinvert":
        sel = _resolve_subset(s, [param] if param else arg)
        out_params = params
        amap = {x: ident(x) for x in params}
        for p in sel:
            amap[p] = _param_image(base, out_params, lambda u, n, p=p: -Poly.var(u, VarId(p)))
        return substitute_params(s, out_params, amap)

    if which == "counit" or which == "eval_ones" or which == "eval_at":
        if which == "eval_at":
            sel = _resolve_subset(s, [param] if param else None)
        else:
            sel = _resolve_subset(s, arg if which == "eval_ones" else ([param] if param else None))
        out_params = tuple(p for p in params if p not in sel)
        amap = {x: ident(x) for x in out_params}
        for p in sel:
            if which == "counit":
                amap[p] = _param_image(base, out_params, lambda u, n: Poly.zero(u))
            elif which == "eval_ones":
                amap[p] = _param_image(base, out_params, lambda u, n: Poly.const(u, 1))
            else:
                t = arg
                if isinstance(t, TowerElement):
                    t = base.coerce(t)
                    amap[p] = _param_image(base, out_params, lambda u, n, t=t: t.at(n).embed(u))
                else:
                    c = Fraction(t)
                    amap[p] = _param_image(base, out_params, lambda u, n, c=c: Poly.const(u, c))
        out = substitute_params(s, out_params, amap)
        if not out_params:
            return TowerElement(base, lambda n: out.coefficient((), n), s.label)
        return out

    if which == "diagonal":
        sel = _resolve_subset(s, arg)
        target = param or sel[0]
        out_params = tuple(p for p in params if p not in sel or p == target)
        amap = {x: ident(x) for x in out_params}
        for p in sel:
            amap[p] = _param_image(base, out_params, lambda u, n: Poly.var(u, VarId(target)))
        return substitute_params(s, out_params, amap)

    if which == "scale":
        factors = arg if isinstance(arg, (list, tuple)) else [arg] * len(params)
        if len(factors) != len(params):
            raise UniverseError("scale needs one factor per parameter")
        out_params = params
        amap = {}
        for p, a in zip(params, factors):
            if isinstance(a, TowerElement):
                a = base.coerce(a)
                amap[p] = _param_image(
                    base, out_params, lambda u, n, p=p, a=a: a.at(n).embed(u) * Poly.var(u, VarId(p))
                )
            else:
                c = Fraction(a)
                amap[p] = _param_image(base, out_params, lambda u, n, p=p, c=c: Poly.var(u, VarId(p)).scale(c))
        return substitute_params(s, out_params, amap)

    raise ValueError(f"unknown Hopf map {which!r}")

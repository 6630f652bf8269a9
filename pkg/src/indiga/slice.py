"""Local slices, the Dixmier-Reynolds projection and the cylinder decomposition.

For a slice s (an element whose exponential is linear in T) with invariant
leading coefficient s1, everything happens in the localization at s1, where
``sigma = w*s`` (w the inverse of s1) satisfies ``e(sigma) = sigma + T``.
Levels where the localization is the zero ring simply produce zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from .exactpoly import Poly, VarId
from .exponential import RestrictedExponential, invariant_test
from .series import LevelData, RestrictedSeries
from .tower import LocalizedTower, TowerElement, localization_tower


def _as_series_poly(data: LevelData, universe, param: VarId) -> Poly:
    ext = tuple(universe) + (param,)
    terms = {}
    for (i,), q in data.items():
        for e, c in q.embed(universe).terms.items():
            terms[e + (i,)] = c
    return Poly._raw(ext, terms)


def localized_exponential(e: RestrictedExponential, L: LocalizedTower) -> RestrictedExponential:
    """Extend e to the localization at an invariant element (the inverse w is fixed)."""
    T = e.source
    param = VarId(e.param)

    def level_map(p: Poly, n: int) -> LevelData:
        lu = L.universe(n)
        ext = lu + (param,)
        amap = {L.w: Poly.var(ext, L.w)}
        for v in T.universe(n):
            img = e.level_map(T.level(n).var(v), n)
            amap[v] = _as_series_poly(img, T.universe(n), param).embed(ext)
        img = p.embed(lu).substitute(amap, ext)
        probe = RestrictedSeries(L, (e.param,), lambda m: {})
        return {k: q for k, q in probe._split(img, n).items()}

    return RestrictedExponential(L, level_map, None, f"{e.label}[1/s1]" if e.label else None, e.param)


@dataclass
class SliceData:
    slice: TowerElement
    s1: TowerElement
    localized: LocalizedTower
    sigma: TowerElement
    exponential: RestrictedExponential
    local_exponential: RestrictedExponential
    depth: int
    zero_levels: List[int] = field(default_factory=list)

    def as_dict(self):
        n = self.depth
        return {
            "slice": self.slice.label,
            "s1": self.s1.at(n).render(),
            "sigma": self.sigma.at(n).render(self.localized.order(n)),
            "localized": self.localized.level(n).render(),
            "zero_levels": self.zero_levels,
        }


def find_local_slice(e: RestrictedExponential, candidates: Sequence[TowerElement], depth: int) -> Optional[SliceData]:
    """First candidate whose exponential is linear in T at every level up to depth."""
    T = e.source
    levels = range(T.first_level, depth + 1)
    for s in candidates:
        s = T.coerce(s)
        degrees = [max((k[0] for k in e.level_map(s.at(n), n)), default=-1) for n in levels]
        if any(d > 1 for d in degrees) or degrees[-1] != 1:
            continue
        s1 = e.coefficient(1, s)
        if not invariant_test(e, s1, depth)[0]:
            continue
        L = localization_tower(T, s1)
        w = L.generator(L.w)
        sigma = w * L.coerce(s)
        sigma.label = f"{s.label}/s1" if s.label else "sigma"
        eL = localized_exponential(e, L)
        zero = [n for n in levels if L.level(n).is_zero_ring()]
        sd = SliceData(s, s1, L, sigma, e, eL, depth, zero)
        if _sigma_translates(sd):
            return sd
    return None


def _sigma_translates(sd: SliceData) -> bool:
    L = sd.localized
    for n in range(L.first_level, sd.depth + 1):
        data = sd.local_exponential.level_map(sd.sigma.at(n), n)
        want = {}
        sig = sd.sigma.at(n)
        if not sig.is_zero():
            want[(0,)] = sig
        one = L.level(n).const(1)
        if not one.is_zero():
            want[(1,)] = one
        if data != want:
            return False
    return True


def dixmier_reynolds(sd: SliceData, b: TowerElement, depth: Optional[int] = None) -> TowerElement:
    """``R(b) = sum e_i(b) (-sigma)^i`` in the localized tower."""
    L = sd.localized
    b = L.coerce(b)
    eL = sd.local_exponential

    def level(n):
        coeffs = eL.coefficients(b.at(n), n)
        neg = -sd.sigma.at(n)
        acc = Poly.zero(L.universe(n))
        power = Poly.const(L.universe(n), 1)
        for c in coeffs:
            acc = acc + c * power
            power = L.level(n).nf(power * neg)
        return acc

    return TowerElement(L, level, f"R({b.label})" if b.label else None)


@dataclass
class Cylinder:
    coefficients: List[TowerElement]
    reconstructs: bool
    invariant: List[bool]
    depth: int

    def as_dict(self):
        n = self.depth
        L = self.coefficients[0].parent if self.coefficients else None
        return {
            "coefficients": [c.at(n).render(L.order(n)) for c in self.coefficients],
            "reconstructs": self.reconstructs,
            "invariant": self.invariant,
        }


def cylinder_decompose(sd: SliceData, b: TowerElement, depth: int) -> Cylinder:
    """Coefficients ``c_i = R(e_i(b))`` with ``b = sum c_i sigma^i``."""
    L = sd.localized
    b = L.coerce(b)
    eL = sd.local_exponential
    top = 0
    for n in range(L.first_level, depth + 1):
        top = max(top, len(eL.coefficients(b.at(n), n)))
    coeffs = [dixmier_reynolds(sd, eL.coefficient(i, b)) for i in range(top)]
    if not coeffs:
        coeffs = [L.zero()]
    ok = True
    for n in range(L.first_level, depth + 1):
        acc = Poly.zero(L.universe(n))
        power = Poly.const(L.universe(n), 1)
        for c in coeffs:
            acc = acc + c.at(n) * power
            power = power * sd.sigma.at(n)
        if L.level(n).nf(acc) != b.at(n):
            ok = False
            break
    inv = [invariant_test(eL, c, depth)[0] for c in coeffs]
    return Cylinder(coeffs, ok, inv, depth)

"""Restricted exponential homomorphisms: exp(T d), coaction checks, flows, conjugation.

An exponential is handled through its level maps: at level n it sends a
normal form to a polynomial in T with level-n coefficients.  Exponentials
built from a certified derivation, from generator images, by conjugation or
by composition all share this representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .derivation import ContinuousDerivation, check_integrable
from .errors import PreconditionError, RequiresCertificate, ResourceExceeded, UniverseError
from .exactpoly import Poly, VarId
from .series import LevelData, RestrictedSeries, _add_into, constant_embed
from .tower import DualCoordinateTower, TowerElement, TowerRing

MAX_TERMS = 2000

LevelMap = Callable[[Poly, int], LevelData]


class RestrictedExponential:
    """A series-valued map ``B -> B{T}`` given levelwise."""

    def __init__(self, source: TowerRing, level_map: LevelMap, derivation: Optional[ContinuousDerivation] = None, label=None, param="T"):
        self.source = source
        self.level_map = level_map
        self.derivation = derivation
        self.label = label
        self.param = param

    def __call__(self, b: TowerElement) -> RestrictedSeries:
        b = self.source.coerce(b)
        return RestrictedSeries(self.source, (self.param,), lambda n: self._keyed(b.at(n), n), b.label)

    def _keyed(self, p, n):
        return {(i,): q for (i,), q in self.level_map(p, n).items()}

    def coefficient(self, i: int, b: TowerElement) -> TowerElement:
        """The coefficient map ``e_i`` applied to b."""
        b = self.source.coerce(b)
        z = Poly.zero

        def level(n):
            return self.level_map(b.at(n), n).get((i,), z(self.source.universe(n)))

        return TowerElement(self.source, level, f"e{i}({b.label})" if b.label else None)

    def coefficients(self, p: Poly, n: int) -> List[Poly]:
        data = self.level_map(p, n)
        top = max((k[0] for k in data), default=-1)
        return [data.get((i,), Poly.zero(self.source.universe(n))) for i in range(top + 1)]

    def __repr__(self):
        return f"<exponential {self.label or ''} on {self.source!r}>"


def _require_certified(D: ContinuousDerivation):
    v = getattr(D, "verdict", None)
    if v is None or v.status != "certified":
        status = v.status if v is not None else "unchecked"
        raise RequiresCertificate(f"exponential needs a certified derivation (verdict: {status})")


def exp_level_map(D: ContinuousDerivation, max_terms: int = MAX_TERMS) -> LevelMap:
    T = D.parent

    def level_map(p: Poly, n: int) -> LevelData:
        out = {}
        cur = T.level(n).nf(p.embed(T.universe(n)) if p.universe != T.universe(n) else p)
        i = 0
        fact = 1
        while not cur.is_zero():
            if i >= max_terms:
                raise ResourceExceeded(f"exp series did not terminate within {max_terms} terms at level {n}")
            out[(i,)] = cur.scale(Fraction(1, fact))
            cur = D.level_action(cur, n)
            i += 1
            fact *= i
        return out

    return level_map


def exponential(D: ContinuousDerivation, max_terms: int = MAX_TERMS) -> RestrictedExponential:
    """``exp(T d)`` for a derivation with a Certified verdict."""
    _require_certified(D)
    return RestrictedExponential(D.parent, exp_level_map(D, max_terms), D, f"exp(T*{D.label})" if D.label else None)


def certify(D: ContinuousDerivation, max_level=6, max_power=12):
    """Run the integrability check and attach the verdict to the derivation."""
    V = check_integrable(D, max_level, max_power)
    D.verdict = V
    return V


def exp_series(D: ContinuousDerivation, b: TowerElement, depth: Optional[int] = None) -> RestrictedSeries:
    """``sum D^(i)(b) T^i`` with each level a finite sum."""
    return exponential(D)(b)


def from_images(T: TowerRing, images: Mapping[VarId, RestrictedSeries], label=None) -> RestrictedExponential:
    """A candidate map extended from generator images as a levelwise substitution."""
    imgs = {}
    for v, s in images.items():
        if len(s.params) != 1:
            raise UniverseError("generator images must be one-parameter series")
        imgs[v] = s
    param = next(iter(imgs.values())).params[0] if imgs else "T"

    def level_map(p: Poly, n: int) -> LevelData:
        u = T.universe(n)
        ext = u + (VarId(param),)
        amap = {}
        for v in u:
            s = imgs.get(v)
            amap[v] = s.as_poly(n) if s is not None else Poly.var(ext, v)
        img = p.embed(u).substitute(amap, ext)
        probe = RestrictedSeries(T, (param,), lambda m: {})
        return probe._split(img, n)

    return RestrictedExponential(T, level_map, None, label, param)


# ------------------------------------------------------------ coaction


@dataclass
class CoactionReport:
    passed: bool
    samples: int
    levels: List[int]
    counit_ok: bool = True
    coassociative: bool = True
    violation: Optional[dict] = None

    def as_dict(self):
        out = {
            "passed": self.passed,
            "samples": self.samples,
            "levels": self.levels,
            "counit": self.counit_ok,
            "coassociative": self.coassociative,
        }
        if self.violation is not None:
            out["violation"] = self.violation
        return out


def _mono_name(i, j):
    parts = []
    if i:
        parts.append("T" if i == 1 else f"T^{i}")
    if j:
        parts.append("T'" if j == 1 else f"T'^{j}")
    return "*".join(parts) or "1"


def coaction_sides(e: RestrictedExponential, p: Poly, n: int) -> Tuple[Dict, Dict]:
    """Both sides of the coassociativity identity as maps (i, j) -> coefficient of T^i T'^j."""
    coeffs = e.coefficients(p, n)
    lhs: Dict[Tuple[int, int], Poly] = {}
    for i, c in enumerate(coeffs):
        if c.is_zero():
            continue
        for j, q in enumerate(e.coefficients(c, n)):
            if not q.is_zero():
                _add_into(lhs, (i, j), q)
    rhs: Dict[Tuple[int, int], Poly] = {}
    for l, c in enumerate(coeffs):
        if c.is_zero():
            continue
        for i in range(l + 1):
            _add_into(rhs, (i, l - i), c.scale(math.comb(l, i)))
    return lhs, rhs


def verify_coaction(e: RestrictedExponential, samples: Sequence[TowerElement], depth: int) -> CoactionReport:
    """Counit and coassociativity checks on samples at levels up to depth; stops at the first violation."""
    T = e.source
    levels = list(range(T.first_level, depth + 1))
    report = CoactionReport(True, len(samples), levels)
    for k, b in enumerate(samples):
        b = T.coerce(b)
        for n in levels:
            p = b.at(n)
            coeffs = e.coefficients(p, n)
            c0 = coeffs[0] if coeffs else Poly.zero(T.universe(n))
            if c0 != p:
                report.passed = report.counit_ok = False
                report.violation = {
                    "sample": k,
                    "element": b.label or p.render(),
                    "level": n,
                    "check": "counit",
                    "expected": p.render(),
                    "found": c0.render(),
                }
                return report
            lhs, rhs = coaction_sides(e, p, n)
            if lhs != rhs:
                keys = sorted(set(lhs) | set(rhs), key=lambda ij: (ij[0] + ij[1], ij))
                for ij in keys:
                    a = lhs.get(ij, Poly.zero(T.universe(n)))
                    c = rhs.get(ij, Poly.zero(T.universe(n)))
                    if a != c:
                        report.passed = report.coassociative = False
                        report.violation = {
                            "sample": k,
                            "element": b.label or p.render(),
                            "level": n,
                            "check": "coassociativity",
                            "coefficient": _mono_name(*ij),
                            "lhs": a.render(),
                            "rhs": c.render(),
                            "difference": (a - c).render(),
                        }
                        return report
    return report


# ---------------------------------------------------------------- flows


def invariant_test(e: RestrictedExponential, b: TowerElement, depth: int) -> Tuple[bool, Optional[int]]:
    """Whether ``e(b)`` equals the constant series of b at all levels up to depth."""
    T = e.source
    b = T.coerce(b)
    for n in range(T.first_level, depth + 1):
        p = b.at(n)
        data = e.level_map(p, n)
        expected = {(0,): p} if not p.is_zero() else {}
        if data != expected:
            return False, n
    return True, None


def flow_level(e: RestrictedExponential, t, n: int) -> Callable[[Poly], Poly]:
    """Level-n endomorphism ``sum e_i(.) t^i``."""
    T = e.source

    def act(p: Poly) -> Poly:
        coeffs = e.coefficients(p, n)
        if isinstance(t, TowerElement):
            tv = t.at(n)
        else:
            tv = Poly.const(T.universe(n), t)
        acc = Poly.zero(T.universe(n))
        power = Poly.const(T.universe(n), 1)
        for c in coeffs:
            acc = acc + c * power
            power = power * tv
        return T.level(n).nf(acc)

    return act


def flow(e: RestrictedExponential, t, b: TowerElement, depth: int = 6) -> TowerElement:
    """The automorphism ``eval_ones . scale(t) . e`` applied to b."""
    T = e.source
    if isinstance(t, TowerElement):
        t = T.coerce(t)
        ok, bad = invariant_test(e, t, depth)
        if not ok:
            raise PreconditionError(
                f"flow time {t.label} is not invariant (fails at level {bad})",
                mode="flow",
                witness={"element": t.label, "level": bad},
            )
    else:
        t = Fraction(t)
    b = T.coerce(b)
    label = f"flow({t if not isinstance(t, TowerElement) else t.label})({b.label})" if b.label else None
    return TowerElement(T, lambda n: flow_level(e, t, n)(b.at(n)), label)


@dataclass
class OrbitRecord:
    t: Fraction
    f: str
    point: Dict[str, Fraction]
    level: int
    coordinates: List[Fraction]
    moved: str
    value: Fraction
    direct: Fraction

    @property
    def agrees(self):
        return self.value == self.direct

    def as_dict(self):
        return {
            "t": str(self.t),
            "f": self.f,
            "point": {k: str(v) for k, v in sorted(self.point.items())},
            "level": self.level,
            "moved": self.moved,
            "value": str(self.value),
            "direct": str(self.direct),
            "agrees": self.agrees,
        }


def orbit_evaluate(e: RestrictedExponential, t, f: Poly, point: Mapping) -> OrbitRecord:
    """Evaluate the translated function ``t.f`` at a point through dual coordinates.

    The coordinates of ``t.f`` are ``X_i(t.f) = flow(-t)(X_i)`` evaluated at
    f's coordinates.  ``direct`` recomputes ``exp(-t delta)(f)`` in the
    algebra and evaluates it at the same point.
    """
    T = e.source
    if not isinstance(T, DualCoordinateTower):
        raise UniverseError("orbit evaluation needs a dual-coordinate tower")
    t = Fraction(t)
    alg = T.algebra
    f = alg.nf(f.embed(alg.universe))
    n = 0
    while True:
        try:
            coords = T.coordinates(f, n)
            break
        except UniverseError:
            n += 1
            if n > 64:
                raise
    u = T.universe(n)
    back = flow_level(e, -t, n)
    assign = {v: Poly.const((), c) for v, c in zip(u, coords)}
    moved_coords = []
    for v in u:
        img = back(Poly.var(u, v))
        moved_coords.append(img.substitute(assign, ()).constant_term())
    moved = Poly.zero(alg.universe)
    for i, c in enumerate(moved_coords):
        if c:
            moved = moved + T.basis_element(i).scale(c)
    pt = {VarId(k) if isinstance(k, str) else k: Fraction(v) for k, v in point.items()}

    def at_point(p: Poly) -> Fraction:
        return p.substitute({v: Poly.const((), pt[v]) for v in alg.universe}, ()).constant_term()

    act = getattr(e.derivation, "algebra_action", None)
    if act is None:
        raise UniverseError("orbit evaluation needs the exponential of a dual derivation")
    direct = Poly.zero(alg.universe)
    cur, k, fact = f, 0, 1
    while not cur.is_zero():
        direct = direct + cur.scale(Fraction((-t) ** k, fact))
        cur = act(cur)
        k += 1
        fact *= k
        if k > MAX_TERMS:
            raise ResourceExceeded("delta is not nilpotent on f")
    return OrbitRecord(
        t, f.render(), {str(k): v for k, v in pt.items()}, n, coords, moved.render(), at_point(moved), at_point(direct)
    )


# ------------------------------------------------------------- combine


def _ring_map(T: TowerRing, assignment: Mapping[VarId, TowerElement]):
    """Levelwise substitution endomorphism given by generator images."""
    imgs = {v: T.coerce(a) for v, a in assignment.items()}

    def at(n):
        def act(p: Poly) -> Poly:
            u = T.universe(n)
            amap = {v: (imgs[v].at(n) if v in imgs else Poly.var(u, v)) for v in u}
            return T.level(n).nf(p.embed(u).substitute(amap, u))

        return act

    return at


def combine(e: RestrictedExponential, mode: str, arg, depth: int = 4) -> RestrictedExponential:
    """Conjugate by a ring automorphism or compose with a commuting exponential."""
    T = e.source
    if mode == "conjugate":
        alpha, alpha_inv = arg
        A, Ainv = _ring_map(T, alpha), _ring_map(T, alpha_inv)
        for n in range(T.first_level, depth + 1):
            for v in T.universe(n):
                g = T.level(n).var(v)
                if A(n)(Ainv(n)(g)) != g or Ainv(n)(A(n)(g)) != g:
                    raise PreconditionError(
                        f"conjugating maps are not inverse on {v} at level {n}",
                        mode="conjugate",
                        witness={"generator": str(v), "level": n},
                    )

        def level_map(p, n):
            data = e.level_map(Ainv(n)(p), n)
            out = {}
            for k, q in data.items():
                r = A(n)(q)
                if not r.is_zero():
                    out[k] = r
            return out

        D = None
        if e.derivation is not None:
            base = e.derivation

            def rule(v):
                pre = TowerElement(T, lambda n: Ainv(n)(T.level(n).var(v)))
                d = base.apply(pre)
                return TowerElement(T, lambda n: A(n)(d.at(n)))

            D = ContinuousDerivation(T, rule, base._shift, f"conj({base.label})")
        out = RestrictedExponential(T, level_map, D, f"conj({e.label})", e.param)
        _audit_degree_one(out, depth)
        return out
    if mode in ("compose", "compose_commuting"):
        f = arg
        if f.source is not T:
            raise PreconditionError("exponentials live on different towers", mode="compose")
        for n in range(T.first_level, depth + 1):
            for v in T.universe(n):
                g = T.level(n).var(v)
                ef = _double(e, f, g, n)
                fe = _double(f, e, g, n)
                swapped = {(j, i): q for (i, j), q in fe.items()}
                if ef != swapped:
                    raise PreconditionError(
                        f"exponentials do not commute on {v} at level {n}",
                        mode="compose",
                        witness={"generator": str(v), "level": n},
                    )

        def level_map(p, n):
            both = _double(e, f, p, n)
            out = {}
            for (i, j), q in both.items():
                _add_into(out, (i + j,), q)
            return out

        D = None
        if e.derivation is not None and f.derivation is not None:
            a, b = e.derivation, f.derivation
            D = ContinuousDerivation(T, lambda v: a.image(v) + b.image(v), 0, f"{a.label}+{b.label}")
        out = RestrictedExponential(T, level_map, D, f"{e.label}*{f.label}", e.param)
        _audit_degree_one(out, depth)
        return out
    raise ValueError(f"unknown combination {mode!r}")


def _double(e, f, p, n):
    """``(e x id) . f`` on p: maps (i, j) to the coefficient of T'^i T^j."""
    out = {}
    for j, c in enumerate(f.coefficients(p, n)):
        if c.is_zero():
            continue
        for i, q in enumerate(e.coefficients(c, n)):
            if not q.is_zero():
                _add_into(out, (i, j), q)
    return out


def _audit_degree_one(e: RestrictedExponential, depth: int):
    """The T-linear coefficient must reproduce the attached derivation on generators."""
    D = e.derivation
    if D is None:
        return
    T = e.source
    for n in range(T.first_level, depth + 1):
        for v in T.universe(n):
            g = T.level(n).var(v)
            coeffs = e.coefficients(g, n)
            c1 = coeffs[1] if len(coeffs) > 1 else Poly.zero(T.universe(n))
            if c1 != D.image(v).at(n):
                raise PreconditionError(
                    f"degree-one coefficient disagrees with the derivation on {v} at level {n}",
                    mode="combine",
                    witness={"generator": str(v), "level": n, "coefficient": c1.render()},
                )

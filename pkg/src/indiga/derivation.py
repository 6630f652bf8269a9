"""Continuous derivations on towers, their iterates, and the integrability check.

A derivation is given by the images of the tower generators.  Its action at
level n takes a representative from level ``n + shift``, applies the Leibniz
extension of the generator images and normal-forms at level n.  The shift
records how far the derivation moves the open ideals: ``d(a_{n+shift})``
lies in ``a_n``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import (
    IllDefinedDerivation,
    NotLocallyNilpotent,
    PreconditionError,
    ResourceExceeded,
    UniverseError,
)
from .exactpoly import GREVLEX, Poly, VarId
from .linalg import nullspace
from .tower import (
    DualCoordinateTower,
    Exhaustion,
    LevelRing,
    TowerElement,
    TowerRing,
    degree_exhaustion,
    localization_tower,
    quotient_tower,
)

ImageRule = Union[Mapping[VarId, object], Callable[[VarId], object]]

MAX_SHIFT = 4
IDEAL_EXTENT = 6


def ideal_lifts(T: TowerRing, m: int, extent: int = IDEAL_EXTENT) -> List[Tuple[Poly, int]]:
    """Exact polynomial lifts of generators of the open ideal of level m.

    Each entry is ``(poly, M)`` with ``poly`` over ``T.universe(M)``; these
    are genuine elements of the ambient polynomial ring, so the Leibniz
    extension may be applied to them without a representative-level caveat.
    """
    from .tower import AdicTower, CutoffTower, DiscreteTower, LocalizedTower, QuotientTower, TensorTower

    if isinstance(T, CutoffTower):
        out = []
        for k in range(T.width(m), T.width(m) + extent):
            M = m
            while T.width(M) <= k:
                M += 1
            u = T.universe(M)
            out.append((Poly.var(u, VarId(T.family, k)) - T.center(k), M))
        return out
    if isinstance(T, AdicTower):
        return [(p, m) for p in T._power_gens(m)]
    if isinstance(T, DiscreteTower):
        return []
    if isinstance(T, (QuotientTower, LocalizedTower)):
        return ideal_lifts(T.base, m, extent)
    if isinstance(T, TensorTower):
        return ideal_lifts(T.left, m, extent) + ideal_lifts(T.right, m, extent)
    raise UniverseError(f"no ideal generators known for {T.kind} towers")


class ContinuousDerivation:
    def __init__(self, parent: TowerRing, images: ImageRule, shift: Optional[int] = None, label: Optional[str] = None):
        self.parent = parent
        self._rule = images
        self._images: Dict[VarId, TowerElement] = {}
        self._lock = threading.RLock()
        self.declared_shift = shift
        self.label = label
        self._shift = shift
        self._chains: Dict[int, Tuple[TowerElement, List[TowerElement]]] = {}

    # -- images

    def image(self, v: VarId) -> TowerElement:
        with self._lock:
            hit = self._images.get(v)
            if hit is not None:
                return hit
        if not self.parent.has_generator(v):
            raise UniverseError(f"{v} is not a generator")
        rule = self._rule
        img = rule(v) if callable(rule) else rule.get(v)
        if img is None:
            raise UniverseError(f"no image given for generator {v}")
        if isinstance(img, TowerElement):
            img = self.parent.coerce(img)
        elif isinstance(img, (int, Fraction)):
            img = self.parent.const(img)
        else:
            raise TypeError(f"image of {v} must be a tower element")
        with self._lock:
            self._images[v] = img
        return img

    # -- level action

    @property
    def shift(self) -> int:
        if self._shift is None:
            self._shift = detect_shift(self)
            if self._shift is None:
                self._shift = MAX_SHIFT
        return self._shift

    def derive_poly(self, p: Poly, M: int, n: int) -> Poly:
        """Leibniz extension applied to ``p`` (over universe(M)), normal-formed at level n."""
        T = self.parent
        lv = T.level(n)
        acc = Poly.zero(lv.universe)
        for v in p.variables():
            dp = p.partial(v)
            if dp.is_zero():
                continue
            img = self.image(v).at(n)
            if img.is_zero():
                continue
            acc = acc + T.project(dp, M, n) * img
        return lv.nf(acc)

    def power_poly(self, p: Poly, M: int, k: int, n: int) -> Poly:
        """``d^k`` of the exact element ``p`` at level n (p over universe(M))."""
        d = self.shift
        T = self.parent
        need = n + k * d
        if M < need:
            p = p.embed(T.universe(need))
            M = need
        cur, level = p, M
        for j in range(k, 0, -1):
            target = n + (j - 1) * d
            cur = self.derive_poly(cur, level, target)
            level = target
        return T.project(cur, level, n)

    def apply(self, a: TowerElement) -> TowerElement:
        a = self.parent.coerce(a)
        label = f"d({a.label})" if a.label else None
        return TowerElement(self.parent, lambda n: self.derive_poly(a.at(n + self.shift), n + self.shift, n), label)

    def __call__(self, a: TowerElement) -> TowerElement:
        return self.apply(a)

    def iterate(self, a: TowerElement, i: int) -> TowerElement:
        """The element ``d^i(a)``, sharing a cached chain of iterates per input."""
        a = self.parent.coerce(a)
        with self._lock:
            hit = self._chains.get(id(a))
            if hit is None or hit[0] is not a:
                hit = (a, [a])
                self._chains[id(a)] = hit
            chain = hit[1]
            while len(chain) <= i:
                chain.append(self.apply(chain[-1]))
            return chain[i]

    def apply_power(self, i: int, a: TowerElement, n: int) -> Poly:
        if i < 0:
            raise ValueError("negative power")
        return self.iterate(a, i).at(n)

    def higher_component(self, i: int, a: TowerElement, n: int) -> Poly:
        return self.apply_power(i, a, n).scale(Fraction(1, math.factorial(i)))

    def level_action(self, p: Poly, n: int) -> Poly:
        """The induced endomorphism of level n (only meaningful for shift 0)."""
        return self.derive_poly(p, n, n)

    # -- audits

    def audit_well_defined(self, depth: int):
        """Check that the level relations are sent into the level ideals; raises IllDefinedDerivation."""
        T = self.parent
        d = self.shift
        for m in range(T.first_level, depth + 1 + d):
            n = m - d
            if n < T.first_level:
                continue
            for g in _relation_lifts(T, m):
                r = self.derive_poly(g, m, n)
                if not r.is_zero():
                    raise IllDefinedDerivation(
                        f"derivative of relation {g.render()} is {r.render()} at level {n}, not in the ideal",
                        relation=g.render(),
                        level=n,
                    )

    def __repr__(self):
        return f"<derivation {self.label or ''} on {self.parent!r}>"


def _relation_lifts(T: TowerRing, m: int) -> List[Poly]:
    """Relations of the level presentation that are not open-ideal generators."""
    from .tower import AdicTower, CutoffTower, DiscreteTower, LocalizedTower, QuotientTower, TensorTower

    u = T.universe(m)
    if isinstance(T, DiscreteTower):
        return list(T._relations)
    if isinstance(T, AdicTower):
        return list(T._base)
    if isinstance(T, CutoffTower):
        return []
    if isinstance(T, QuotientTower):
        return [p.embed(u) for p in _relation_lifts(T.base, m)] + [g.at(m) for g in T.gens]
    if isinstance(T, LocalizedTower):
        base = [p.embed(u) for p in _relation_lifts(T.base, m)]
        return base + [Poly.var(u, T.w) * T.f.at(m).embed(u) - 1]
    if isinstance(T, TensorTower):
        return [p.embed(u) for p in _relation_lifts(T.left, m)] + [p.embed(u) for p in _relation_lifts(T.right, m)]
    return list(T.level(m).basis.generators)


def detect_shift(D: ContinuousDerivation, max_level: int = 6, max_shift: int = MAX_SHIFT) -> Optional[int]:
    """Smallest d <= max_shift with d(a_{n+d}) in a_n for n <= max_level (on ideal generators)."""
    T = D.parent
    for d in range(max_shift + 1):
        if _shift_ok(D, d, max_level):
            return d
    return None


def _shift_ok(D, d, max_level):
    T = D.parent
    for n in range(T.first_level, max_level + 1):
        for g, M in ideal_lifts(T, n + d):
            if M < n:
                g, M = g.embed(T.universe(n)), n
            if not D.derive_poly(g, M, n).is_zero():
                return False
    return True


def make_derivation(T: TowerRing, images: ImageRule, shift: Optional[int] = None, *, audit_depth: int = 4, label=None) -> ContinuousDerivation:
    D = ContinuousDerivation(T, images, shift, label)
    if shift is not None and not _shift_ok(D, shift, audit_depth):
        raise IllDefinedDerivation(f"declared shift {shift} does not map open ideals as claimed")
    D.audit_well_defined(audit_depth)
    return D


def zero_derivation(T: TowerRing) -> ContinuousDerivation:
    return ContinuousDerivation(T, lambda v: T.zero(), 0, "0")


class HigherDerivation:
    """The divided powers ``D^(i) = d^i / i!`` of a derivation."""

    def __init__(self, base: ContinuousDerivation):
        self.base = base

    def component(self, i: int, a: TowerElement) -> TowerElement:
        it = self.base.iterate(a, i)
        c = Fraction(1, math.factorial(i))
        return TowerElement(self.base.parent, lambda n: it.at(n).scale(c))

    def at(self, i: int, a: TowerElement, n: int) -> Poly:
        return self.base.higher_component(i, a, n)


# -------------------------------------------------------------- verdicts


@dataclass
class IntegrabilityVerdict:
    status: str  # certified | refuted | inconclusive
    window: Tuple[int, int]
    shift: Optional[int] = None
    orders: Dict[int, int] = field(default_factory=dict)
    witness: Optional[dict] = None
    family: List[dict] = field(default_factory=list)
    reason: str = ""

    @property
    def certified(self):
        return self.status == "certified"

    def as_dict(self):
        out = {
            "status": self.status,
            "window": {"max_level": self.window[0], "max_power": self.window[1]},
            "shift": self.shift,
        }
        if self.status == "certified":
            out["orders"] = [{"level": k, "order": v} for k, v in sorted(self.orders.items())]
        if self.witness is not None:
            out["witness"] = self.witness
            out["family"] = self.family
        if self.reason:
            out["reason"] = self.reason
        return out


def nilpotency_order(D: ContinuousDerivation, n: int, max_power: int) -> Optional[int]:
    """Least N with d^N killing every generator at level n (shift 0), or None within max_power."""
    T = D.parent
    lv = T.level(n)
    if lv.is_zero_ring():
        return 0
    order = 0
    for v in T.universe(n):
        cur = lv.var(v)
        k = 0
        while not cur.is_zero():
            if k >= max_power:
                return None
            cur = D.level_action(cur, n)
            k += 1
        order = max(order, k)
    return order


def check_integrable(D: ContinuousDerivation, max_level: int = 6, max_power: int = 12) -> IntegrabilityVerdict:
    """Run the integrability check and remember the verdict on the derivation."""
    V = _check_integrable(D, max_level, max_power)
    D.verdict = V
    return V


def _check_integrable(D, max_level, max_power):
    """Certify, refute, or give up on topological integrability within a window.

    Certification needs a shift of 0 (so each level carries an induced
    derivation) and nilpotency of that level derivation on the level
    generators.  Refutation looks, at some level i, for open-ideal
    generators g with ``d^l(g)`` outside ``a_i`` at every power l of the
    window, with the witnessing ideal depth reaching past max_level.
    """
    T = D.parent
    window = (max_level, max_power)
    D.audit_well_defined(max_level)
    d = detect_shift(D, max_level)
    if d is not None and D.declared_shift is None:
        D._shift = d
    if d == 0:
        orders = {}
        for n in range(T.first_level, max_level + 1):
            k = nilpotency_order(D, n, max_power)
            if k is None:
                orders = None
                break
            orders[n] = k
        if orders is not None:
            return IntegrabilityVerdict("certified", window, 0, orders)
    if d is None:
        return IntegrabilityVerdict(
            "inconclusive", window, None, reason=f"no ideal shift <= {MAX_SHIFT} found up to level {max_level}"
        )
    for i in range(max(T.first_level, 1), max_level + 1):
        family = _escape_family(D, i, d, max_level, max_power)
        if family is not None and family[-1]["ideal_level"] >= max_level:
            w = family[0]
            return IntegrabilityVerdict(
                "refuted",
                window,
                d,
                witness={"generator": w["generator"], "power": w["power"], "level": w["level"]},
                family=family,
            )
    return IntegrabilityVerdict(
        "inconclusive", window, d, reason="neither levelwise nilpotency nor an escaping family within the window"
    )


def _escape_family(D, i, d, max_level, max_power):
    T = D.parent
    family = []
    for l in range(1, max_power + 1):
        found = None
        top = max_level + d * l + 2
        for m in range(top, 0, -1):
            for g, M in ideal_lifts(T, m):
                val = D.power_poly(g, M, l, i)
                if not val.is_zero():
                    found = {
                        "generator": g.render(),
                        "power": l,
                        "level": i,
                        "ideal_level": m,
                        "image": val.render(),
                    }
                    break
            if found:
                break
        if found is None:
            return None
        family.append(found)
    return family


def replay_witness(D: ContinuousDerivation, generator: str, power: int, level: int) -> Poly:
    """Recompute ``d^power(generator)`` at ``level`` from a witness record."""
    from .expr import evaluate, parse_expr

    T = D.parent
    node = parse_expr(generator)
    needed = []

    def resolve(name, index):
        v = T.resolve(name, index)
        needed.append(v)
        return v

    evaluate(node, resolve)
    M = level + power * D.shift
    for v in needed:
        while v not in T.universe(M):
            M += 1
    from .expr import parse_poly

    g = parse_poly(generator, T.universe(M))
    return D.power_poly(g, M, power, level)


# ------------------------------------------------------------- transforms


def derive_transform(D: ContinuousDerivation, mode: str, arg, depth: int = 4) -> ContinuousDerivation:
    """Scale by an invariant, add a commuting derivation, pass to a quotient, or localize."""
    T = D.parent
    if mode in ("scale", "scale_by_invariant"):
        f = T.coerce(arg)
        _require_invariant(D, f, depth, "scale")
        return ContinuousDerivation(T, lambda v: f * D.image(v), D._shift, f"({f.label})*{D.label}")
    if mode in ("sum", "sum_commuting"):
        E = arg
        if E.parent is not T:
            raise PreconditionError("derivations live on different towers", mode="sum")
        for n in range(T.first_level, depth + 1):
            for v in T.universe(n):
                g = T.generator(v)
                lhs = D.apply(E.apply(g)).at(n)
                rhs = E.apply(D.apply(g)).at(n)
                if lhs != rhs:
                    raise PreconditionError(
                        f"derivations do not commute on {v} at level {n}",
                        mode="sum",
                        witness={"generator": str(v), "level": n, "difference": (lhs - rhs).render()},
                    )
        shift = None if D._shift is None or E._shift is None else max(D._shift, E._shift)
        return ContinuousDerivation(T, lambda v: D.image(v) + E.image(v), shift, f"{D.label}+{E.label}")
    if mode == "quotient":
        gens = [T.coerce(g) for g in arg]
        Q = quotient_tower(T, gens)
        witnesses = []
        for g in gens:
            dg = D.apply(g)
            for n in range(T.first_level, depth + 1):
                r = Q.level(n).nf(dg.at(n))
                if not r.is_zero():
                    raise PreconditionError(
                        f"derivative of {g.label} is not in the ideal at level {n}",
                        mode="quotient",
                        witness={"generator": g.label, "level": n, "remainder": r.render()},
                    )
            witnesses.append({"generator": g.label, "derivative": dg.at(depth).render(T.order(depth))})
        out = ContinuousDerivation(Q, lambda v: Q.coerce(D.image(v)), D._shift, D.label)
        out.membership = witnesses
        return out
    if mode == "localize":
        f = T.coerce(arg)
        _require_invariant(D, f, depth, "localize")
        L = localization_tower(T, f)
        w = L.generator(L.w)
        df = L.coerce(D.apply(f))

        def rule(v):
            if v == L.w:
                return -(w * w) * df
            return L.coerce(D.image(v))

        return ContinuousDerivation(L, rule, D._shift, D.label)
    raise ValueError(f"unknown transform {mode!r}")


def _require_invariant(D, f, depth, mode):
    df = D.apply(f)
    for n in range(D.parent.first_level, depth + 1):
        r = df.at(n)
        if not r.is_zero():
            raise PreconditionError(
                f"{f.label} is not in the kernel: derivative {r.render()} at level {n}",
                mode=mode,
                witness={"element": f.label, "level": n, "derivative": r.render()},
            )


# ----------------------------------------------------------------- kernel


def kernel_basis(D: ContinuousDerivation, n: int, degree_bound: int) -> List[Poly]:
    """Kernel of the derivation on the lifts of level-n standard monomials of degree <= bound.

    Monomials are lifted to level ``n + shift + 1`` through the canonical
    section and differentiated there, so a variable that only dies at level
    n because its image was truncated is not reported as a constant.
    """
    T = D.parent
    monos = T.level(n).standard_monomials(degree_bound)
    M = n + D.shift + 1
    target = n + 1
    images = [D.derive_poly(m.embed(T.universe(M)), M, target) for m in monos]
    cols = sorted({e for p in images for e in p.terms})
    index = {e: k for k, e in enumerate(cols)}
    # rows: one per output monomial, columns: one per input monomial
    rows = [[Fraction(0)] * len(monos) for _ in cols]
    for j, p in enumerate(images):
        for e, c in p.terms.items():
            rows[index[e]][j] = c
    basis = nullspace(rows, len(monos)) if rows else [
        [Fraction(1) if k == j else Fraction(0) for k in range(len(monos))] for j in range(len(monos))
    ]
    out = []
    for vec in basis:
        p = Poly.zero(T.universe(n))
        for c, m in zip(vec, monos):
            if c:
                p = p + m.scale(c)
        out.append(p)
    out.sort(key=lambda p: GREVLEX.key(p.leading(GREVLEX)[0]))
    return out


# ---------------------------------------------------------- dual towers


def algebra_derivation(algebra: LevelRing, delta: Mapping[VarId, Poly]):
    """Leibniz extension of ``delta`` on a finitely presented algebra, normal-formed."""
    u = algebra.universe
    imgs = {}
    for v in u:
        p = delta.get(v)
        if p is None:
            p = Poly.zero(u)
        elif not isinstance(p, Poly):
            p = Poly.const(u, p)
        imgs[v] = algebra.nf(p.embed(u))

    def act(p: Poly) -> Poly:
        acc = Poly.zero(u)
        for v in p.variables():
            acc = acc + p.partial(v) * imgs[v]
        return algebra.nf(acc)

    for g in algebra.basis.generators:
        r = act(g)
        if not r.is_zero():
            raise IllDefinedDerivation(
                f"delta does not preserve the relation {g.render()}", relation=g.render(), level=0
            )
    return act


def dual_derivation(
    algebra: LevelRing,
    delta: Mapping[VarId, Poly],
    exhaustion: Optional[Callable[[int], List[Poly]]] = None,
    family: str = "X",
    max_iter: int = 64,
) -> Tuple[DualCoordinateTower, ContinuousDerivation]:
    """Dual-coordinate tower of a delta-stable exhaustion and the derivation dual to delta.

    With basis ``b_0, b_1, ...`` of the exhaustion and ``delta(b_c) = sum_b A[b][c] b_b``,
    the dual derivation sends ``X[b]`` to ``sum_c A[b][c] X[c]``.
    """
    act = algebra_derivation(algebra, delta)
    gen = exhaustion or degree_exhaustion(algebra)
    exh = Exhaustion(algebra, gen, closure=act, label="degree" if exhaustion is None else "custom", max_iter=max_iter)
    T = DualCoordinateTower(algebra, exh, family)
    coords: Dict[Tuple[int, int], List[Fraction]] = {}

    def column(c, n):
        # coordinates of delta(b_c) in the basis of W_n
        key = (c, n)
        if key not in coords:
            coords[key] = exh.coordinates(act(exh.basis_element(c)), n)
        return coords[key]

    def rule(v: VarId):
        b = v.index
        if b is None or v.name != family:
            raise UniverseError(f"{v} is not a dual coordinate")
        return TowerElement(T, lambda n, b=b: _dual_image(T, column, b, n), f"d({v})")

    D = ContinuousDerivation(T, rule, 0, "dual")
    D.algebra_action = act
    return T, D


def _dual_image(T, column, b, n):
    u = T.universe(n)
    acc = Poly.zero(u)
    if b >= len(u):
        return acc
    for c in range(len(u)):
        a = column(c, n)[b]
        if a:
            acc = acc + Poly.var(u, VarId(T.family, c)).scale(a)
    return acc

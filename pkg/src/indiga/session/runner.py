"""Execute parsed session scripts into reports."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

from .. import __version__
from ..derivation import (
    ContinuousDerivation,
    check_integrable,
    derive_transform,
    dual_derivation,
    kernel_basis,
    replay_witness,
)
from ..errors import IndigaError, SessionNameError, UniverseError
from ..exactpoly import Poly, VarId
from ..expr import Indexed, Name, Node, Num, affine_in, evaluate, render as render_expr
from ..exponential import (
    RestrictedExponential,
    exponential,
    flow,
    flow_level,
    from_images,
    invariant_test,
    orbit_evaluate,
    verify_coaction,
)
from ..groebner import Limits
from ..series import RestrictedSeries
from ..slice import cylinder_decompose, dixmier_reynolds, find_local_slice
from ..tower import (
    AdicTower,
    CutoffTower,
    DiscreteTower,
    LevelRing,
    TowerElement,
    TowerRing,
    element_compare,
    is_zero_localization,
    localization_tower,
    make_tower,
    quotient_tower,
    tensor_tower,
)
from .dsl import SessionScript, Statement, parse_session

REPORT_VERSION = 1


@dataclass
class Config:
    depth: int = 6
    power: int = 12
    deg: int = 4
    seed: int = 0
    samples: int = 20
    max_pairs: int = 100_000
    max_reductions: int = 100_000
    fail_fast: bool = False

    def as_dict(self):
        return {
            "depth": self.depth,
            "power": self.power,
            "deg": self.deg,
            "seed": self.seed,
            "samples": self.samples,
            "max_pairs": self.max_pairs,
            "max_reductions": self.max_reductions,
        }


@dataclass
class Record:
    line: int
    statement: str
    head: str
    status: str  # ok | failed | skipped
    result: dict = field(default_factory=dict)
    error: Optional[dict] = None
    seconds: float = 0.0

    def as_dict(self, timings=False):
        out = {"line": self.line, "statement": self.statement, "kind": self.head, "status": self.status}
        if self.result:
            out["result"] = self.result
        if self.error is not None:
            out["error"] = self.error
        if timings:
            out["seconds"] = round(self.seconds, 6)
        return out


@dataclass
class Report:
    config: Config
    records: List[Record] = field(default_factory=list)
    source: Optional[str] = None

    @property
    def failed(self):
        return [r for r in self.records if r.status == "failed"]

    def as_dict(self, timings=False):
        return {
            "report_version": REPORT_VERSION,
            "tool": {"name": "indiga", "version": __version__},
            "config": self.config.as_dict(),
            "source": self.source,
            "records": [r.as_dict(timings) for r in self.records],
            "summary": {
                "records": len(self.records),
                "failed": len(self.failed),
                "ok": sum(1 for r in self.records if r.status == "ok"),
            },
        }


# --------------------------------------------------------------- helpers


def _frac(node: Node) -> Fraction:
    v = evaluate(node, _no_names)
    if not isinstance(v, Fraction):
        raise UniverseError(f"{render_expr(node)} is not a rational constant")
    return v


def _no_names(name, index):
    raise UniverseError(f"{name} is not a constant")


def _int_from(node: Node) -> int:
    v = _frac(node)
    if v.denominator != 1:
        raise UniverseError(f"{render_expr(node)} is not an integer")
    return int(v)


class _Env:
    def __init__(self, config: Config):
        self.config = config
        self.values: Dict[str, object] = {}
        self.rng = random.Random(config.seed)
        self.limits = Limits(config.max_pairs, config.max_reductions)

    def get(self, name, kind=None):
        if name not in self.values:
            raise SessionNameError(f"{name!r} is not defined")
        v = self.values[name]
        if kind is not None and not isinstance(v, kind):
            raise SessionNameError(f"{name!r} has the wrong kind")
        return v

    # expression evaluation at a level

    def resolver(self, T: TowerRing, n: int, extra=None):
        names = T.generator_names()

        def resolve(name, index):
            if extra and name in extra and index is None:
                return extra[name]
            if name in names:
                v = T.resolve(name, index)
                return T.gen_rep(v, n)
            val = self.values.get(name)
            if isinstance(val, TowerElement) and index is None:
                return T.coerce(val).at(n)
            raise SessionNameError(f"{name!r} is not a generator or element here")

        return resolve

    def element(self, T: TowerRing, node: Node, bindings=None) -> TowerElement:
        if isinstance(node, Name) and node.id in self.values and isinstance(self.values[node.id], TowerElement):
            return T.coerce(self.values[node.id])
        bindings = dict(bindings or {})
        lv = T.level

        def promote(n):
            val = evaluate(node, self.resolver(T, n), {**bindings, "n": n} if "n" not in T.generator_names() else bindings)
            if isinstance(val, Fraction):
                return Poly.const(T.universe(n), val)
            return val

        return TowerElement(T, promote, render_expr(node))


def _rules_to_images(env: _Env, T: TowerRing, rules, extra_env=None):
    """Turn ``{ lhs -> rhs }`` rules into a generator -> element callable.

    Literal left-hand sides win; otherwise indexed patterns are tried in
    order, matching when the index solves to a non-negative integer.
    """
    literal = {}
    patterns = []
    for lhs, rhs in rules:
        if isinstance(lhs, Name):
            literal[VarId(lhs.id)] = rhs
        elif isinstance(lhs, Indexed):
            idx = lhs.index
            try:
                k = evaluate(idx, _no_names)
            except IndigaError:
                k = None
            if isinstance(k, Fraction):
                literal[VarId(lhs.name, int(k))] = rhs
            else:
                names = _names_in(idx)
                if len(names) != 1:
                    raise UniverseError(f"rule pattern {render_expr(lhs)} needs exactly one index variable")
                var = names.pop()
                slope, offset = affine_in(idx, var)
                patterns.append((lhs.name, var, slope, offset, rhs))
        else:
            raise UniverseError(f"rule left side {render_expr(lhs)} is not a generator")

    def rule(v: VarId):
        if v in literal:
            return env.element(T, literal[v])
        for fam, var, slope, offset, rhs in patterns:
            if fam != v.name or v.index is None:
                continue
            diff = v.index - offset
            if slope == 0:
                if diff != 0:
                    continue
                i = 0
            else:
                if diff % slope:
                    continue
                i = diff // slope
            if i < 0:
                continue
            return env.element(T, rhs, {var: i})
        raise UniverseError(f"no rule gives the image of {v}")

    return rule


def _names_in(node):
    from ..expr import BinOp, Neg, Pow

    if isinstance(node, Name):
        return {node.id}
    if isinstance(node, BinOp):
        return _names_in(node.left) | _names_in(node.right)
    if isinstance(node, Neg):
        return _names_in(node.operand)
    if isinstance(node, Pow):
        return _names_in(node.base)
    return set()


def random_elements(T: TowerRing, rng: random.Random, count: int, level: int, max_deg=3, max_vars=4) -> List[TowerElement]:
    """Seeded random elements: small polynomials in the first generators of ``level``."""
    u = T.universe(level)[:max_vars]
    full = T.universe(level)
    out = []
    for k in range(count):
        terms = {}
        for _ in range(rng.randint(1, 4)):
            e = [0] * len(full)
            for _ in range(rng.randint(0, max_deg)):
                if u:
                    e[full.index(rng.choice(u))] += 1
            c = Fraction(rng.randint(-3, 3), rng.choice([1, 1, 2]))
            if c:
                terms[tuple(e)] = terms.get(tuple(e), 0) + c
        p = Poly(full, terms)
        out.append(_lifted(T, p, level, f"sample{k}"))
    return out


def _lifted(T, p, level, label):
    def promote(n):
        if n >= level:
            return p.embed(T.universe(n))
        return T.project(p, level, n)

    return TowerElement(T, promote, label)


# -------------------------------------------------------------- execution


def execute(script: SessionScript, config: Optional[Config] = None, source: Optional[str] = None) -> Report:
    config = config or Config()
    env = _Env(config)
    report = Report(config, [], source)
    for k, st in enumerate(script.statements):
        start = time.perf_counter()
        rec = Record(st.line, st.render(), st.head, "ok")
        try:
            rec.result = _run(env, st) or {}
        except (IndigaError, ValueError, ZeroDivisionError, OverflowError) as exc:
            rec.status = "failed"
            rec.error = {"type": type(exc).__name__, "message": str(exc)}
            for attr in ("witness", "relation", "level", "mode", "upper", "lower"):
                val = getattr(exc, attr, None)
                if val is not None:
                    rec.error[attr] = val
        rec.seconds = time.perf_counter() - start
        report.records.append(rec)
        if rec.status == "failed" and config.fail_fast:
            for rest in script.statements[k + 1 :]:
                report.records.append(Record(rest.line, rest.render(), rest.head, "skipped"))
            break
    return report


def run_text(text: str, config: Optional[Config] = None, source=None) -> Report:
    return execute(parse_session(text), config, source)


def _run(env: _Env, st: Statement) -> dict:
    handler = _HANDLERS[st.head]
    return handler(env, st)


def _level(env, st, key="level"):
    return st.knob(key, env.config.depth)


def _names(nodes):
    return [n.id for n in nodes]


def _tower(env: _Env, st: Statement) -> dict:
    pos = st.positionals()
    kind = pos[0].id
    lim = env.limits
    if kind in ("adic", "discrete", "dual", "dual_coordinate"):
        spec = {
            "kind": kind,
            "vars": _names(st.option("vars", ())),
            "relations": [render_expr(r) for r in st.option("relations", ())],
        }
        if kind == "adic":
            spec["ideal"] = [render_expr(g) for g in st.option("ideal")]
        T = make_tower(spec, lim)
    elif kind == "cutoff":
        fam = st.option("family", Name("X"))
        centers = st.option("centers", Num(0))
        T = make_tower({"kind": "cutoff", "family": fam.id, "centers": _frac(centers)}, lim)
    elif kind == "tensor":
        T = tensor_tower(env.get(pos[1].id, TowerRing), env.get(pos[2].id, TowerRing))
    elif kind == "quotient":
        B = env.get(pos[1].id, TowerRing)
        T = quotient_tower(B, [env.element(B, g) for g in st.option("ideal")])
    else:
        B = env.get(pos[1].id, TowerRing)
        T = localization_tower(B, env.element(B, st.option("f")))
    T.name = st.name
    env.values[st.name] = T
    n = max(T.first_level, 1) if kind != "discrete" else 0
    return {"tower": T.describe(), "level": n, "presentation": T.level(n).render()}


def _elem(env, st):
    pos = st.positionals()
    T = env.get(pos[0].id, TowerRing)
    a = env.element(T, pos[1])
    a.label = st.name
    env.values[st.name] = a
    n = env.config.depth
    # promote ascending so the compatibility audit sees every level
    for k in range(0, n + 1):
        a.at(k)
    return {"level": n, "representative": a.at(n).render(T.order(n))}


def _der(env, st):
    T = env.get(st.positionals()[0].id, TowerRing)
    rule = _rules_to_images(env, T, st.rules())
    from ..derivation import make_derivation

    D = make_derivation(T, rule, st.knob("shift"), audit_depth=env.config.depth, label=st.name)
    env.values[st.name] = D
    return {"tower": T.name, "shift": D.shift}


def _dual(env, st):
    R = env.get(st.positionals()[0].id, TowerRing)
    if not isinstance(R, DiscreteTower):
        raise UniverseError("dual derivations need a discrete algebra")
    alg = R.level(0)
    delta = {}
    for lhs, rhs in st.rules():
        if not isinstance(lhs, Name):
            raise UniverseError("dual rules act on plain algebra variables")
        val = env.element(R, rhs).at(0)
        delta[VarId(lhs.id)] = val
    fam = st.option("family", Name("X")).id
    T, D = dual_derivation(alg, delta, family=fam)
    tname = st.option("tower").id
    T.name = tname
    D.label = st.name
    D.algebra_tower = R
    env.values[tname] = T
    env.values[st.name] = D
    n = min(env.config.depth, 4)
    return {
        "tower": tname,
        "basis": [T.basis_element(i).render() for i in range(T.width(n))],
        "images": {str(v): D.image(v).at(n).render() for v in T.universe(n)},
        "level": n,
    }


def _transform(env, st):
    pos = st.positionals()
    D = env.get(pos[0].id, ContinuousDerivation)
    mode = pos[1].id
    T = D.parent
    depth = env.config.depth
    if mode == "scale":
        out = derive_transform(D, "scale", env.element(T, pos[2]), depth)
    elif mode == "sum":
        out = derive_transform(D, "sum", env.get(pos[2].id, ContinuousDerivation), depth)
    elif mode == "quotient":
        out = derive_transform(D, "quotient", [env.element(T, g) for g in st.option("ideal")], depth)
    else:
        out = derive_transform(D, "localize", env.element(T, st.option("f")), depth)
    out.label = st.name
    res = {"mode": mode}
    if out.parent is not T:
        tname = st.option("tower")
        name = tname.id if isinstance(tname, Name) else f"{st.name}.tower"
        out.parent.name = name
        env.values[name] = out.parent
        res["tower"] = name
        n = max(out.parent.first_level, 1)
        res["presentation"] = out.parent.level(n).render()
    if getattr(out, "membership", None):
        res["membership"] = out.membership
    env.values[st.name] = out
    return res


def _coaction(env, st):
    T = env.get(st.positionals()[0].id, TowerRing)
    images = {}
    for lhs, rhs in st.rules():
        if isinstance(lhs, Name):
            v = VarId(lhs.id)
        else:
            v = VarId(lhs.name, _int_from(lhs.index))
        images[v] = _series(env, T, rhs)
    E = from_images(T, images, st.name)
    env.values[st.name] = E
    return {"tower": T.name, "generators": sorted(str(v) for v in images)}


def _series(env, T, node):
    def level(n):
        ext = T.universe(n) + (VarId("T"),)
        base = env.resolver(T, n)

        def resolve(name, index):
            if name == "T" and index is None:
                return Poly.var(ext, VarId("T"))
            val = base(name, index)
            return val.embed(ext) if isinstance(val, Poly) else val

        val = evaluate(node, resolve, {"n": n})
        return val if isinstance(val, Poly) else Poly.const(ext, val)

    return RestrictedSeries(T, ("T",), level, render_expr(node))


def _exponential_of(env, obj) -> RestrictedExponential:
    if isinstance(obj, RestrictedExponential):
        return obj
    D = obj
    if getattr(D, "verdict", None) is None:
        check_integrable(D, env.config.depth, env.config.power)
    return exponential(D)


def _check(env, st):
    D = env.get(st.positionals()[0].id, ContinuousDerivation)
    V = check_integrable(D, _level(env, st), st.knob("power", env.config.power))
    out = V.as_dict()
    if V.status == "refuted":
        replays = []
        for w in V.family[: min(3, len(V.family))]:
            img = replay_witness(D, w["generator"], w["power"], w["level"])
            replays.append({"generator": w["generator"], "power": w["power"], "level": w["level"], "image": img.render()})
        out["replay"] = replays
        out["family"] = [
            {k: w[k] for k in ("generator", "power", "level", "ideal_level", "image")} for w in V.family
        ]
    return out


def _exp(env, st):
    pos = st.positionals()
    D = env.get(pos[0].id, ContinuousDerivation)
    E = _exponential_of(env, D)
    T = D.parent
    b = env.element(T, pos[1])
    s = E(b)
    L = _level(env, st)
    return {
        "element": b.label,
        "levels": [{"level": n, "series": s.render(n)} for n in range(T.first_level, L + 1)],
    }


def _verify(env, st):
    obj = env.get(st.positionals()[0].id)
    E = _exponential_of(env, obj)
    T = E.source
    L = st.knob("level", min(env.config.depth, 5))
    count = st.knob("samples", env.config.samples)
    samples = [T.generator(v) for v in T.universe(L)[:4]] + random_elements(T, env.rng, count, L)
    return verify_coaction(E, samples, L).as_dict()


def _time(env, T, node):
    try:
        return _frac(node)
    except UniverseError:
        return env.element(T, node)


def _flow(env, st):
    pos = st.positionals()
    D = env.get(pos[0].id, ContinuousDerivation)
    E = _exponential_of(env, D)
    T = D.parent
    L = _level(env, st)
    t = _time(env, T, st.option("t", Num(1)))
    b = env.element(T, pos[1])
    moved = flow(E, t, b, L)
    back = flow(E, -t if isinstance(t, Fraction) else -t, moved, L)
    levels = range(T.first_level, L + 1)
    return {
        "t": str(t) if isinstance(t, Fraction) else t.label,
        "element": b.label,
        "image": moved.at(L).render(T.order(L)),
        "inverse_restores": all(back.at(n) == b.at(n) for n in levels),
        "level": L,
    }


def _flow_law(env, st):
    D = env.get(st.positionals()[0].id, ContinuousDerivation)
    E = _exponential_of(env, D)
    T = D.parent
    L = st.knob("level", min(env.config.depth, 5))
    count = st.knob("samples", env.config.samples)
    samples = random_elements(T, env.rng, count, L)
    failures = []
    for b in samples:
        t1 = Fraction(env.rng.randint(-4, 4), env.rng.choice([1, 2, 3]))
        t2 = Fraction(env.rng.randint(-4, 4), env.rng.choice([1, 2, 3]))
        for n in range(T.first_level, L + 1):
            p = b.at(n)
            two = flow_level(E, t1, n)(flow_level(E, t2, n)(p))
            one = flow_level(E, t1 + t2, n)(p)
            inv = flow_level(E, Fraction(1), n)(flow_level(E, Fraction(-1), n)(p))
            if two != one or inv != p:
                failures.append({"sample": b.label, "level": n, "t": str(t1), "t2": str(t2)})
                break
    return {"samples": len(samples), "level": L, "passed": not failures, "failures": failures[:5]}


def _invariants(env, st):
    D = env.get(st.positionals()[0].id, ContinuousDerivation)
    L = _level(env, st)
    deg = st.knob("deg", env.config.deg)
    basis = kernel_basis(D, L, deg)
    return {"level": L, "deg": deg, "basis": [p.render() for p in basis]}


def _invariant(env, st):
    pos = st.positionals()
    E = _exponential_of(env, env.get(pos[0].id))
    b = env.element(E.source, pos[1])
    ok, bad = invariant_test(E, b, _level(env, st))
    return {"element": b.label, "invariant": ok, "first_failing_level": bad}


def _slice_data(env, st, E, T, candidates):
    L = _level(env, st)
    sd = find_local_slice(E, [env.element(T, c) for c in candidates], L)
    return sd, L


def _slice(env, st):
    D = env.get(st.positionals()[0].id, ContinuousDerivation)
    E = _exponential_of(env, D)
    T = D.parent
    sd, L = _slice_data(env, st, E, T, st.option("candidates", ()))
    if sd is None:
        return {"found": False, "level": L}
    return {"found": True, "level": L, **sd.as_dict()}


def _slice_for(env, st):
    pos = st.positionals()
    D = env.get(pos[0].id, ContinuousDerivation)
    E = _exponential_of(env, D)
    T = D.parent
    s = st.option("s")
    if s is None:
        raise UniverseError(f"{st.head} needs s=")
    sd, L = _slice_data(env, st, E, T, [s])
    if sd is None:
        raise UniverseError(f"{render_expr(s)} is not a local slice up to level {L}")
    return sd, L, env.element(T, pos[1])


def _reynolds(env, st):
    sd, L, b = _slice_for(env, st)
    r = dixmier_reynolds(sd, b, L)
    Lt = sd.localized
    return {
        "element": b.label,
        "level": L,
        "value": r.at(L).render(Lt.order(L)),
        "invariant": invariant_test(sd.local_exponential, r, L)[0],
        "zero_levels": sd.zero_levels,
    }


def _decompose(env, st):
    sd, L, b = _slice_for(env, st)
    cy = cylinder_decompose(sd, b, L)
    return {"element": b.label, "level": L, "sigma": sd.sigma.at(L).render(), **cy.as_dict()}


def _localize(env, st):
    T = env.get(st.positionals()[0].id, TowerRing)
    f = env.element(T, st.option("f"))
    V = is_zero_localization(T, f, _level(env, st))
    out = V.as_dict()
    L = _level(env, st)
    LT = V.tower
    if not LT.level(L).is_zero_ring():
        w = LT.generator(LT.w)
        prod = LT.level(L).nf(w.at(L) * LT.coerce(f).at(L))
        out["inverse_check"] = prod.render()
    return out


def _metric(env, st):
    pos = st.positionals()
    a = env.get(pos[0].id, TowerElement)
    b = env.element(a.parent, pos[1])
    return element_compare(a, b, st.knob("depth", env.config.depth)).as_dict()


def _orbit(env, st):
    D = env.get(st.positionals()[0].id, ContinuousDerivation)
    R = getattr(D, "algebra_tower", None)
    if R is None:
        raise UniverseError("orbit needs a derivation defined with dual")
    E = _exponential_of(env, D)
    t = _frac(st.option("t", Num(1)))
    f = env.element(R, st.option("f")).at(0)
    pt_nodes = st.option("point", ())
    alg = R.level(0)
    if len(pt_nodes) != len(alg.universe):
        raise UniverseError("point needs one coordinate per algebra variable")
    point = {v: _frac(c) for v, c in zip(alg.universe, pt_nodes)}
    return orbit_evaluate(E, t, f, point).as_dict()


def _audit(env, st):
    T = env.get(st.positionals()[0].id, TowerRing)
    L = min(_level(env, st), 5)
    failures = T.audit_transitions(L)
    return {"level": L, "coherent": not failures, "failures": failures[:5]}


_HANDLERS = {
    "tower": _tower,
    "elem": _elem,
    "der": _der,
    "dual": _dual,
    "transform": _transform,
    "coaction": _coaction,
    "check-integrable": _check,
    "exp": _exp,
    "verify-coaction": _verify,
    "flow": _flow,
    "flow-law": _flow_law,
    "invariants": _invariants,
    "invariant": _invariant,
    "slice": _slice,
    "reynolds": _reynolds,
    "decompose": _decompose,
    "localize": _localize,
    "metric": _metric,
    "orbit": _orbit,
    "audit": _audit,
}

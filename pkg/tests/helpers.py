"""Fixture towers and derivations shared by the test modules."""

import random
from fractions import Fraction
from functools import reduce

from indiga.derivation import check_integrable, make_derivation
from indiga.exactpoly import Poly, VarId
from indiga.exponential import exponential
from indiga.tower import LevelRing, make_tower, tensor_tower

u_, x_, y_, z_ = VarId("u"), VarId("x"), VarId("y"), VarId("z")


def X(i):
    return VarId("X", i)


def ufc():
    """u-adic Q[[u]] with u^2 d/du, certified."""
    T = make_tower({"kind": "adic", "vars": ["u"], "ideal": ["u"]})
    u = T.generator(u_)
    D = make_derivation(T, {u_: u**2}, label="ufc")
    check_integrable(D)
    return T, D, u


def dplus():
    C = make_tower({"kind": "cutoff", "family": "X", "centers": 0})
    D = make_derivation(C, lambda v: (v.index + 1) * C.generator(X(v.index + 1)), label="dplus")
    check_integrable(D)
    return C, D


def mixed_rule(C):
    def rule(v):
        i = v.index
        if i == 0:
            j = 1
        elif i % 2:
            j = i + 2
        else:
            j = i - 2
        return C.generator(X(j))

    return rule


def mixed():
    C = make_tower({"kind": "cutoff", "family": "X", "centers": 0})
    return C, make_derivation(C, mixed_rule(C), label="mixed")


def ddx():
    K = make_tower({"kind": "discrete", "vars": ["x"]})
    x = K.generator(x_)
    D = make_derivation(K, {x_: 1}, label="d/dx")
    check_integrable(D)
    return K, D, x


def triangular():
    P = make_tower({"kind": "discrete", "vars": ["x", "y"]})
    x, y = P.generator(x_), P.generator(y_)
    D = make_derivation(P, {x_: 0, y_: x}, label="tri")
    check_integrable(D)
    return P, D, x, y


def danielewski():
    """Cutoff(centers 1) tensor Q[y,z], the element x, and the triangular derivation."""
    C = make_tower({"kind": "cutoff", "family": "X", "centers": 1})
    K = make_tower({"kind": "discrete", "vars": ["y", "z"]})
    A = tensor_tower(C, K)

    def partial_product(n):
        u = A.universe(n)
        return reduce(lambda a, b: a * b, [Poly.var(u, X(i)) for i in range(n)], Poly.const(u, 1))

    x = A.element(partial_product, "x")
    y, z = A.generator(y_), A.generator(z_)
    D = make_derivation(A, lambda v: A.zero() if v.name == "X" else (x if v == y_ else 2 * y), label="dan")
    return A, D, x, y, z


def dual_line():
    from indiga.derivation import dual_derivation

    R = LevelRing(0, (x_,), [])
    T, D = dual_derivation(R, {x_: Poly.const((x_,), 1)})
    check_integrable(D)
    return T, D


def random_poly(rng, universe, max_deg=3, terms=4, coeff=5):
    out = {}
    for _ in range(rng.randint(1, terms)):
        e = [0] * len(universe)
        for _ in range(rng.randint(0, max_deg)):
            e[rng.randrange(len(universe))] += 1
        c = Fraction(rng.randint(-coeff, coeff), rng.choice([1, 1, 2, 3]))
        out[tuple(e)] = out.get(tuple(e), 0) + c
    return Poly(universe, out)


def random_elements(T, seed, count, level, max_vars=4, max_deg=3):
    """Seeded random elements given by a polynomial in the first generators of ``level``."""
    rng = random.Random(seed)
    full = T.universe(level)
    sub = full[:max_vars]
    out = []
    for k in range(count):
        p = random_poly(rng, sub, max_deg).embed(full)

        def promote(n, p=p):
            if n >= level:
                return p.embed(T.universe(n))
            return T.project(p, level, n)

        out.append(T.element(promote, f"r{k}"))
    return out

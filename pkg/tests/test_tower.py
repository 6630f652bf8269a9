import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from indiga.errors import CompatibilityError, UniverseError
from indiga.exactpoly import Poly, VarId
from indiga.tower import (
    Exhaustion,
    LevelRing,
    degree_exhaustion,
    element_compare,
    is_zero_localization,
    localization_tower,
    make_tower,
    quotient_tower,
    tensor_tower,
)

from helpers import X, danielewski, random_elements, u_, x_, y_


def adic():
    return make_tower({"kind": "adic", "vars": ["u"], "ideal": ["u"]})


def test_adic_levels():
    T = adic()
    assert T.first_level == 1
    assert [T.level(n).render() for n in range(1, 4)] == ["Q[u]/(u)", "Q[u]/(u^2)", "Q[u]/(u^3)"]
    u = T.generator(u_)
    assert (u**3).at(3).is_zero()
    assert (u**3).at(4) == Poly.var((u_,), u_) ** 3


def test_cutoff_levels_and_transitions():
    C = make_tower({"kind": "cutoff", "family": "X", "centers": 0})
    assert C.universe(3) == (X(0), X(1), X(2))
    t = C.transition(3, 1)
    assert t[X(0)] == Poly.var((X(0),), X(0))
    assert t[X(1)].is_zero() and t[X(2)].is_zero()
    assert C.audit_transitions(5) == []


def test_cutoff_with_centers_sends_to_center():
    C = make_tower({"kind": "cutoff", "family": "X", "centers": 1})
    t = C.transition(2, 1)
    assert t[X(1)] == Poly.const((X(0),), 1)


def test_metric():
    T = adic()
    u = T.generator(u_)
    cmp = element_compare(u, u + u**3, 6)
    assert cmp.first_divergence_level == 4
    assert cmp.metric == Fraction(1, 8)
    assert element_compare(u, u, 6).metric == 0


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 12))
def test_metric_is_power_of_two(k):
    T = adic()
    u = T.generator(u_)
    cmp = element_compare(1 + u, 1 + u + u**k, 14)
    assert cmp.first_divergence_level == k + 1
    assert cmp.metric == Fraction(1, 2**k)


def test_element_audit_catches_incompatible_family():
    T = adic()
    # level n representative u^0 at even levels, u at odd levels: not a compatible family
    bad = T.element(lambda n: Poly.var(T.universe(n), u_) if n % 2 else Poly.const(T.universe(n), 1))
    bad.at(2)
    with pytest.raises(CompatibilityError):
        bad.at(3)


def test_tensor_universe_collision():
    K = make_tower({"kind": "discrete", "vars": ["x"]})
    with pytest.raises(UniverseError):
        tensor_tower(K, K)


def test_danielewski_quotient_is_well_formed():
    A, D, x, y, z = danielewski()
    assert x.at(3) == Poly.var(A.universe(3), X(0)) * Poly.var(A.universe(3), X(1)) * Poly.var(A.universe(3), X(2))
    assert A.audit_transitions(4) == []
    Q = quotient_tower(A, [x * z - y**2, x])
    assert Q.audit_transitions(4) == []
    assert Q.level(3).render() == "Q[X[0], X[1], X[2], y, z]/(X[0]*X[1]*X[2], y^2)"


def test_localization_at_topologically_nilpotent_element_is_zero():
    T = adic()
    verdict = is_zero_localization(T, T.generator(u_), 6)
    assert verdict.zero_to_depth
    assert [z for _, z in verdict.levels] == [True] * 6


def test_localization_of_polynomial_ring_inverts():
    K = make_tower({"kind": "discrete", "vars": ["x"]})
    x = K.generator(x_)
    assert not is_zero_localization(K, x, 6).zero_to_depth
    L = localization_tower(K, x)
    for n in range(4):
        assert (L.inverse * x).at(n) == Poly.const(L.universe(n), 1)


def test_localization_at_unit_of_adic_tower():
    T = adic()
    u = T.generator(u_)
    L = localization_tower(T, 1 - u)
    w = L.inverse
    # (1 - u)^{-1} = 1 + u + u^2 + ... levelwise
    geo = sum((u**i for i in range(6)), T.zero())
    assert element_compare(w, L.coerce(geo), 6).metric == 0


def test_dual_coordinate_basis():
    R = LevelRing(0, (x_,), [])
    ex = Exhaustion(R, degree_exhaustion(R))
    assert [ex.dim(n) for n in range(4)] == [1, 2, 3, 4]
    p = Poly.var((x_,), x_) ** 2 * 3 + 1
    assert ex.coordinates(p, 3) == [1, 0, 3, 0]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_ring_operations_commute_with_projection(seed):
    A, D, x, y, z = danielewski()
    a, b = random_elements(A, seed, 2, 3)
    for n in range(1, 4):
        for m in range(1, n + 1):
            assert A.project((a * b).at(n), n, m) == (a * b).at(m)
            assert A.project((a - b).at(n), n, m) == (a - b).at(m)


def test_level_zero_is_zero_ring_for_adic_and_cutoff():
    assert make_tower({"kind": "adic", "vars": ["u"], "ideal": ["u"]}).level(0).is_zero_ring()
    assert make_tower({"kind": "cutoff", "family": "X"}).level(0).is_zero_ring()
    assert not make_tower({"kind": "discrete", "vars": ["x"]}).level(0).is_zero_ring()


def test_cutoff_localized_at_first_variable_is_nonzero():
    C = make_tower({"kind": "cutoff", "family": "X", "centers": 0})
    V = is_zero_localization(C, C.generator(X(0)), 5)
    assert not any(z for _, z in V.levels)


def test_adic_localized_at_unit_is_nonzero():
    T = adic()
    assert not any(z for _, z in is_zero_localization(T, T.one(), 5).levels)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_metric_is_symmetric_ultrametric(seed):
    T = adic()
    u = T.generator(u_)
    rng = random.Random(seed)
    a, b, c = (sum((rng.randint(-2, 2) * u**k for k in range(7)), T.zero()) for _ in range(3))
    d = lambda p, q: element_compare(p, q, 8).metric
    assert d(a, b) == d(b, a)
    assert d(a, c) <= max(d(a, b), d(b, c))

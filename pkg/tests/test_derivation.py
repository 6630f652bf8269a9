from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from indiga.derivation import (
    HigherDerivation,
    check_integrable,
    derive_transform,
    dual_derivation,
    ideal_lifts,
    kernel_basis,
    make_derivation,
    replay_witness,
    zero_derivation,
)
from indiga.errors import IllDefinedDerivation, PreconditionError
from indiga.exactpoly import Poly
from indiga.tower import LevelRing, make_tower

from helpers import X, danielewski, ddx, dplus, mixed, random_elements, triangular, u_, ufc, x_, y_


FIXTURES = {"ufc": ufc, "dplus": dplus, "ddx": ddx, "triangular": triangular}


def fixture(name):
    out = FIXTURES[name]()
    return out[0], out[1]


def test_ufc_certified_with_orders():
    T, D, u = ufc()
    V = D.verdict
    assert V.status == "certified" and V.shift == 0 and V.window == (6, 12)
    # u^2 d/du is nilpotent on Q[u]/(u^n): d^k(u) = k! u^{k+1}
    assert V.orders == {n: n - 1 for n in range(1, 7)}


def test_dplus_kernel_is_constants():
    C, D = dplus()
    assert D.verdict.certified
    kb = kernel_basis(D, 5, 3)
    assert kb == [Poly.const(C.universe(5), 1)]


def test_triangular_kernel():
    P, D, x, y = triangular()
    kb = kernel_basis(D, 0, 2)
    X_ = Poly.var(P.universe(0), x_)
    assert sorted(p.render() for p in kb) == sorted(["1", "x", "x^2"])


def test_mixed_is_refuted_with_family():
    C, D = mixed()
    V = check_integrable(D)
    assert V.status == "refuted"
    assert V.witness == {"generator": "X[2]", "power": 1, "level": 1}
    for k, rec in enumerate(V.family[:3], start=1):
        assert (rec["generator"], rec["power"], rec["level"]) == (f"X[{2 * k}]", k, 1)
        assert replay_witness(D, rec["generator"], rec["power"], rec["level"]) == Poly.var(C.universe(1), X(0))


def test_adic_ideal_lifts():
    T = make_tower({"kind": "adic", "vars": ["u"], "ideal": ["u"]})
    lifts = ideal_lifts(T, 3)
    assert [p.render() for p, _ in lifts] == ["u^3"]


def test_ill_defined_derivation_rejected():
    K = make_tower({"kind": "discrete", "vars": ["y"], "relations": ["y"]})
    with pytest.raises(IllDefinedDerivation):
        make_derivation(K, {y_: 1})


def test_zero_derivation_is_certified():
    T, _, _ = ufc()
    D = zero_derivation(T)
    assert check_integrable(D).certified


def test_scale_requires_invariant():
    P, D, x, y = triangular()
    E = derive_transform(D, "scale", x)
    assert E.apply(y).at(0) == Poly.var(P.universe(0), x_) ** 2
    with pytest.raises(PreconditionError) as err:
        derive_transform(D, "scale", y)
    assert err.value.witness["element"] == "y"


def test_quotient_descends_danielewski():
    A, D, x, y, z = danielewski()
    Q = derive_transform(D, "quotient", [x * z - y**2], depth=4)
    assert Q.membership[0]["derivative"] == "0"


def test_quotient_rejects_non_stable_ideal():
    A, D, x, y, z = danielewski()
    with pytest.raises(PreconditionError):
        derive_transform(D, "quotient", [y], depth=3)


def test_dual_derivation_of_d_dx():
    R = LevelRing(0, (x_,), [])
    T, D = dual_derivation(R, {x_: Poly.const((x_,), 1)})
    # on coordinates of the monomial basis the derivative is X_i -> (i+1) X_{i+1}
    for i in range(4):
        assert D.image(X(i)).at(i + 2) == Poly.var(T.universe(i + 2), X(i + 1)).scale(i + 1)
    assert check_integrable(D).certified


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_leibniz_on_samples(name):
    T, D = fixture(name)
    depth = 4
    for a, b in zip(*[iter(random_elements(T, 11, 20, 3))] * 2):
        lhs = D(a * b)
        rhs = a * D(b) + D(a) * b
        for n in range(T.first_level, depth + 1):
            assert lhs.at(n) == rhs.at(n)


@settings(max_examples=10, deadline=None)
@given(st.sampled_from(sorted(FIXTURES)), st.integers(0, 10**6))
def test_higher_derivation_composition(name, seed):
    T, D = fixture(name)
    H = HigherDerivation(D)
    (a,) = random_elements(T, seed, 1, 3)
    n = 3
    for i in range(4):
        for j in range(4 - i + 1):
            lhs = H.component(i, H.component(j, a)).at(n)
            assert lhs == H.at(i + j, a, n).scale(comb(i + j, i))

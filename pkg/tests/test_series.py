import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from indiga.errors import UniverseError
from indiga.exactpoly import Poly
from indiga.series import constant_embed, from_coefficients, hopf_map, param_series, series_arith
from indiga.tower import element_compare, make_tower

from helpers import random_elements, u_

T = make_tower({"kind": "adic", "vars": ["u"], "ideal": ["u"]})
u = T.generator(u_)


def random_series(seed, terms=4):
    rng = random.Random(seed)
    coeffs = random_elements(T, seed, terms, 4, max_deg=4)
    for i, c in enumerate(coeffs):
        # restrictedness: the i-th coefficient lies in (u^i)
        coeffs[i] = c * u ** rng.randint(i, i + 1)
    return from_coefficients(T, lambda n: coeffs)


def same(a, b, depth=5):
    return all(a.equal_at(b, n) for n in range(1, depth + 1))


def test_restricted_series_truncate():
    s = from_coefficients(T, lambda n: [u**i for i in range(n)])
    assert s.render(3) == "(1) + (u)*T + (u^2)*T^2"
    assert s.t_degree(3) == 2


def test_comultiply_of_param():
    t = param_series(T, "T")
    d = hopf_map(t, "comultiply")
    assert d.params == ("T", "T'")
    assert d.render(2) == "T + T'"


def test_counit_removes_parameter():
    s = constant_embed(u) + param_series(T) * u
    e = hopf_map(s, "counit")
    assert element_compare(e, u, 5).equal_to_depth


def test_unknown_parameter():
    with pytest.raises(UniverseError):
        hopf_map(param_series(T), "comultiply", param="S")
    with pytest.raises(UniverseError):
        param_series(T, "S", ("T",))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_counit_and_coassociativity(seed):
    s = random_series(seed)
    d = hopf_map(s, "comultiply")
    # (id x counit) comultiply = id
    assert same(hopf_map(d, "counit", param="T'"), s)
    left = hopf_map(d, "comultiply", param="T", new="T''")
    right = hopf_map(d, "comultiply", param="T'", new="T''")
    # left: T -> T + T'' ; right: T' -> T' + T''; relabel so both read T + T' + T''
    for n in range(1, 5):
        assert left.as_poly(n) == right.as_poly(n)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_antipode(seed):
    s = random_series(seed)
    d = hopf_map(s, "comultiply")
    sd = hopf_map(d, "coinvert", param="T")
    collapsed = hopf_map(sd, "diagonal", ["T", "T'"])
    counit = constant_embed(hopf_map(s, "counit"))
    assert same(collapsed, counit)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.fractions(min_value=-10, max_value=10, max_denominator=5))
def test_evaluation_is_a_ring_map(seed, t):
    a, b = random_series(seed), random_series(seed + 1)
    prod = hopf_map(series_arith(a, "mul", b), "eval_at", t)
    assert element_compare(prod, hopf_map(a, "eval_at", t) * hopf_map(b, "eval_at", t), 5).equal_to_depth


def test_scale_matches_substitution():
    s = from_coefficients(T, lambda n: [u**i for i in range(n)])
    sc = hopf_map(s, "scale", 2)
    for n in range(1, 5):
        for (i,), c in sc.at(n).items():
            assert c == s.at(n)[(i,)].scale(2**i)

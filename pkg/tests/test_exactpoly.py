from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from indiga.errors import UniverseError
from indiga.exactpoly import GREVLEX, LEX, MonomialOrder, Poly, VarId, formal_partial, poly_arith, substitute

U = tuple(VarId(n) for n in "abcdef")
x, y, z, u, T = (VarId(n) for n in "xyzuT")


def P(terms, universe=U):
    return Poly(universe, terms)


coeffs = st.fractions(min_value=-(2**63), max_value=2**63, max_denominator=2**16)
exps = st.tuples(*[st.integers(0, 5)] * 6).filter(lambda e: sum(e) <= 5)
polys = st.dictionaries(exps, coeffs, max_size=6).map(P)


def test_difference_of_squares():
    U2 = (x, y)
    a, b = Poly.var(U2, x), Poly.var(U2, y)
    assert (a + b) * (a - b) == a * a - b * b
    assert poly_arith(a + b, "mul", a - b).render() == "x^2 - y^2"


def test_substitute_binomial():
    U2 = (u, T)
    p = Poly.var(U2, u) ** 2
    q = substitute(p, {u: Poly.var(U2, u) + Poly.var(U2, T), T: Poly.var(U2, T)})
    assert q.render() == "u^2 + 2*u*T + T^2"


def test_annihilation():
    p = P({(1, 2, 0, 0, 0, 0): 3})
    assert (p * Poly.zero(U)).is_zero()


def test_partials():
    U3 = (x, y, z)
    X_, Y_, Z_ = (Poly.var(U3, v) for v in U3)
    assert formal_partial(Y_**3, y) == 3 * Y_**2
    assert formal_partial(X_ * Z_ - Y_**2, y) == -2 * Y_
    assert formal_partial(X_ * Z_, VarId("z")) == X_
    assert formal_partial(X_ + 5, y).is_zero()
    with pytest.raises(UniverseError):
        formal_partial(X_, VarId("w"))


def test_universe_mismatch():
    with pytest.raises(UniverseError):
        Poly.var((x,), x) + Poly.var((y,), y)


def test_substitute_must_cover_variables():
    with pytest.raises(UniverseError):
        substitute(Poly.var((x, y), x) * Poly.var((x, y), y), {x: Poly.var((x, y), y)})


def test_render_orders():
    U2 = (x, y)
    p = Poly.var(U2, x) + Poly.var(U2, y) ** 2 + Fraction(1, 2)
    assert p.render(GREVLEX) == "y^2 + x + 1/2"
    assert p.render(LEX) == "x + y^2 + 1/2"


def test_indexed_variables_render():
    assert str(VarId("X", 3)) == "X[3]"
    with pytest.raises(ValueError):
        VarId("X", -1)


def test_overflow_guard():
    p = Poly.var((x,), x)
    with pytest.raises(OverflowError):
        p ** (2**64)


def test_elimination_order_puts_block_first():
    order = MonomialOrder("elim", 1)
    # w^1 beats any monomial without w
    assert order.key((1, 0)) > order.key((0, 9))


@settings(max_examples=60, deadline=None)
@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c
    assert a - a == Poly.zero(U)


@settings(max_examples=60, deadline=None)
@given(polys, polys, st.lists(polys, min_size=6, max_size=6))
def test_substitution_is_a_homomorphism(p, q, images):
    amap = dict(zip(U, images))
    assert (p * q).substitute(amap) == p.substitute(amap) * q.substitute(amap)
    assert (p + q).substitute(amap) == p.substitute(amap) + q.substitute(amap)


@settings(max_examples=60, deadline=None)
@given(polys, polys, st.sampled_from(U))
def test_leibniz(p, q, v):
    assert (p * q).partial(v) == p * q.partial(v) + p.partial(v) * q


@settings(max_examples=60, deadline=None)
@given(polys, polys)
def test_lowest_terms_and_no_zero_coefficients(p, q):
    for r in (p + q, p * q, p - q):
        for c in r.terms.values():
            assert isinstance(c, Fraction)
            assert c != 0
            assert c.denominator >= 1
            from math import gcd

            assert gcd(c.numerator, c.denominator) == 1

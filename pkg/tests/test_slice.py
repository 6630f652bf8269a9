import random
from fractions import Fraction
from math import factorial

from indiga.exactpoly import Poly
from indiga.exponential import exponential
from indiga.slice import cylinder_decompose, dixmier_reynolds, find_local_slice

from helpers import ddx, random_elements, random_poly, triangular, ufc, x_, y_


def line_slice():
    K, D, x = ddx()
    e = exponential(D)
    sd = find_local_slice(e, [x], 4)
    return K, sd


def test_ufc_has_no_slice():
    T, D, u = ufc()
    assert find_local_slice(exponential(D), [u, u**2], 6) is None


def test_line_slice_data():
    K, sd = line_slice()
    assert sd is not None
    assert sd.s1.at(0) == Poly.const(K.universe(0), 1)
    assert sd.zero_levels == []


def test_reynolds_is_evaluation_at_zero():
    K, sd = line_slice()
    L = sd.localized
    rng = random.Random(8)
    for _ in range(20):
        p = random_poly(rng, (x_,), 5, 5)
        b = K.element(lambda n, p=p: p)
        r = dixmier_reynolds(sd, b)
        value = p.substitute({x_: Poly.const((), 0)}, ()).constant_term()
        assert r.at(0) == Poly.const(L.universe(0), value)
        assert dixmier_reynolds(sd, r).at(0) == r.at(0)


def test_reynolds_identity():
    K, sd = line_slice()
    samples = random_elements(K, 21, 40, 0, max_deg=4)
    for b, b2 in zip(samples[::2], samples[1::2]):
        rb = dixmier_reynolds(sd, b)
        lhs = dixmier_reynolds(sd, rb * sd.localized.coerce(b2))
        rhs = rb * dixmier_reynolds(sd, b2)
        assert lhs.at(0) == rhs.at(0)


def test_cylinder_gives_maclaurin_coefficients():
    K, sd = line_slice()
    rng = random.Random(2)
    for _ in range(20):
        p = random_poly(rng, (x_,), 5, 6)
        b = K.element(lambda n, p=p: p)
        cyl = cylinder_decompose(sd, b, 2)
        assert cyl.reconstructs and all(cyl.invariant)
        d, k = p, 0
        for c in cyl.coefficients:
            val = d.substitute({x_: Poly.const((), 0)}, ()).constant_term() / factorial(k)
            assert c.at(0) == Poly.const(sd.localized.universe(0), val)
            d, k = d.partial(x_), k + 1


def test_triangular_decomposition_of_y_squared():
    P, D, x, y = triangular()
    e = exponential(D)
    sd = find_local_slice(e, [x, y], 3)
    assert sd.slice.label == "y"
    cyl = cylinder_decompose(sd, y * y, 3)
    assert cyl.reconstructs
    L = sd.localized
    X_ = Poly.var(L.universe(0), x_)
    assert [c.at(0) for c in cyl.coefficients] == [Poly.zero(L.universe(0)), Poly.zero(L.universe(0)), X_**2]

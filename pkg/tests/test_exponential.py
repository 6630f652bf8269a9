import random
from fractions import Fraction

import pytest

from indiga.derivation import check_integrable
from indiga.errors import PreconditionError, RequiresCertificate
from indiga.exactpoly import Poly
from indiga.exponential import (
    combine,
    exp_series,
    exponential,
    flow,
    from_images,
    invariant_test,
    orbit_evaluate,
    verify_coaction,
)
from indiga.series import constant_embed, param_series
from indiga.tower import element_compare

from helpers import danielewski, ddx, dplus, dual_line, mixed, random_elements, random_poly, triangular, u_, ufc, x_

CERTIFIED = {"ufc": ufc, "dplus": dplus, "ddx": ddx}


def get(name):
    out = CERTIFIED[name]()
    return out[0], out[1]


def test_ufc_exp_series_is_geometric():
    T, D, u = ufc()
    s = exp_series(D, u)
    for n in range(2, 7):
        U = Poly.var(T.universe(n), u_)
        assert s.at(n) == {(i,): U ** (i + 1) for i in range(n - 1)}
    assert s.render(3) == "(u) + (u^2)*T"


def test_exponential_needs_certificate():
    C, D = mixed()
    with pytest.raises(RequiresCertificate):
        exponential(D)
    check_integrable(D)
    with pytest.raises(RequiresCertificate):
        exponential(D)


def test_invariants_ufc():
    T, D, u = ufc()
    e = exponential(D)
    # e(1 - u) = 1 - u - u^2 T - ..., visible once u^2 survives
    assert invariant_test(e, 1 - u, 6) == (False, 3)
    assert invariant_test(e, T.const(3), 6) == (True, None)


@pytest.mark.parametrize("name", sorted(CERTIFIED))
def test_coaction_holds(name):
    T, D = get(name)
    e = exponential(D)
    report = verify_coaction(e, random_elements(T, 5, 20, 4), 5)
    assert report.passed, report.violation


def test_bad_candidate_fails_coassociativity():
    T, D, u = ufc()
    e = from_images(T, {u_: constant_embed(u) + param_series(T) * u})
    report = verify_coaction(e, [u], 5)
    assert not report.passed
    assert report.violation["check"] == "coassociativity"
    assert report.violation["coefficient"] == "T*T'"
    assert report.violation["difference"] in ("u", "-u")


@pytest.mark.parametrize("name", sorted(CERTIFIED))
def test_flow_group_law(name):
    T, D = get(name)
    e = exponential(D)
    rng = random.Random(17)
    for b in random_elements(T, 9, 20, 4):
        t, s = Fraction(rng.randint(-5, 5), rng.randint(1, 3)), Fraction(rng.randint(-5, 5), rng.randint(1, 3))
        assert element_compare(flow(e, t, flow(e, s, b)), flow(e, t + s, b), 5).equal_to_depth
        assert element_compare(flow(e, 1, flow(e, -1, b)), b, 5).equal_to_depth


def test_flow_time_must_be_invariant():
    T, D, u = ufc()
    e = exponential(D)
    with pytest.raises(PreconditionError):
        flow(e, u, u)
    P, D, x, y = triangular()
    e = exponential(D)
    # x is invariant, so it is an admissible time: y -> y + x*x
    assert flow(e, x, y).at(0) == Poly.var(P.universe(0), y.parent.resolve("y")) + Poly.var(P.universe(0), x_) ** 2


def test_orbit_matches_translation():
    T, D = dual_line()
    e = exponential(D)
    rng = random.Random(4)
    for _ in range(10):
        f = random_poly(rng, (x_,), 4, 4)
        t = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        p = Fraction(rng.randint(-4, 4), rng.randint(1, 2))
        rec = orbit_evaluate(e, t, f, {"x": p})
        # (t.f)(p) = f(p - t)
        expect = f.substitute({x_: Poly.const((), p - t)}, ()).constant_term()
        assert rec.value == expect == rec.direct


def test_danielewski_invariant():
    A, D, x, y, z = danielewski()
    check_integrable(D)
    e = exponential(D)
    assert invariant_test(e, x * z - y**2, 4) == (True, None)
    assert invariant_test(e, x, 4)[0]
    assert not invariant_test(e, y, 4)[0]


def test_conjugation_and_composition():
    K, D, x = ddx()
    e = exponential(D)
    half = combine(e, "conjugate", ({x_: 2 * x}, {x_: x * Fraction(1, 2)}))
    assert half(x).render(0) == "(x) + (1/2)*T"
    twice = combine(e, "compose", e)
    assert twice(x).render(0) == "(x) + (2)*T"
    with pytest.raises(PreconditionError):
        combine(e, "conjugate", ({x_: 2 * x}, {x_: x}))

"""Independent brute-force oracles used to freeze and cross-check expected values."""

from fractions import Fraction
from itertools import combinations_with_replacement

from indiga.exactpoly import Poly
from indiga.linalg import SpanChecker


def monomials_upto(nvars, d):
    out = []
    for k in range(d + 1):
        for combo in combinations_with_replacement(range(nvars), k):
            e = [0] * nvars
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return out


def degree_bounded_member(p: Poly, gens, bound):
    """True if p is a Q-combination of m*g with deg(m*g) <= bound (Macaulay truncation)."""
    if p.is_zero():
        return True
    if p.degree() > bound:
        return False
    n = len(p.universe)
    cols = {m: i for i, m in enumerate(monomials_upto(n, bound))}
    span = SpanChecker(len(cols))
    for g in gens:
        if g.is_zero():
            continue
        for m in monomials_upto(n, bound - g.degree()):
            row = {}
            for e, c in g.terms.items():
                row[cols[tuple(a + b for a, b in zip(e, m))]] = c
            span.add(row)
    return span.contains({cols[e]: c for e, c in p.terms.items()})


def binomial_series_coeffs(n):
    """Coefficients of exp_series(u) for u -> u^2: the flow u/(1 - uT) truncated mod u^n."""
    return {i: Fraction(1) for i in range(n - 1)}

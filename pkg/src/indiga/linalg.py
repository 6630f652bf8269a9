"""Exact row reduction over the rationals (small dense systems)."""

from fractions import Fraction
from typing import List, Sequence


def rref(rows: Sequence[Sequence[Fraction]]):
    """Reduced row echelon form; returns (rows, pivot columns)."""
    m = [[Fraction(x) for x in r] for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> List[List[Fraction]]:
    """Basis of {v : A v = 0} for the matrix with the given rows."""
    red, pivots = rref(rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


class SpanChecker:
    """Incrementally echelonized row space; answers membership queries."""

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.rows = {}  # pivot column -> normalized sparse row

    def _reduce(self, vec):
        v = {i: Fraction(x) for i, x in vec.items() if x}
        while v:
            col = min(v)
            row = self.rows.get(col)
            if row is None:
                return v
            f = v[col]
            for i, x in row.items():
                s = v.get(i, 0) - f * x
                if s:
                    v[i] = s
                else:
                    v.pop(i, None)
        return v

    def add(self, vec):
        v = self._reduce(vec)
        if not v:
            return False
        col = min(v)
        inv = 1 / v[col]
        self.rows[col] = {i: x * inv for i, x in v.items()}
        return True

    def contains(self, vec):
        return not self._reduce(vec)

    @property
    def rank(self):
        return len(self.rows)

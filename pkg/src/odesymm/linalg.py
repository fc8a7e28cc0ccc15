"""Exact sparse linear algebra over the rationals."""

from __future__ import annotations

from fractions import Fraction


class RowReducer:
    """Incrementally maintained reduced row echelon form.

    Rows are sparse dicts ``{column: Fraction}``.  Each accepted row is
    reduced against the current basis, normalized so that its lowest column
    carries a 1, and then eliminated from every other stored row, so the
    stored rows always form the unique RREF of everything added so far.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.rows: dict[int, dict] = {}

    def reduce(self, row: dict) -> dict:
        row = {c: Fraction(v) for c, v in row.items() if v}
        for c in sorted(c for c in row if c in self.rows):
            v = row.get(c)
            if not v:
                continue
            for pc, pv in self.rows[c].items():
                nv = row.get(pc, 0) - v * pv
                if nv:
                    row[pc] = nv
                else:
                    row.pop(pc, None)
        return row

    def add(self, row: dict) -> bool:
        """Add a row; returns True when it increased the rank."""
        row = self.reduce(row)
        if not row:
            return False
        p = min(row)
        inv = 1 / row[p]
        row = {c: v * inv for c, v in row.items()}
        for other in self.rows.values():
            v = other.get(p)
            if v:
                for c, rv in row.items():
                    nv = other.get(c, 0) - v * rv
                    if nv:
                        other[c] = nv
                    else:
                        other.pop(c, None)
        self.rows[p] = row
        return True

    @property
    def rank(self) -> int:
        return len(self.rows)

    def pivots(self) -> list:
        return sorted(self.rows)

    def matrix(self) -> list:
        """Dense RREF rows in pivot order."""
        return [[self.rows[p].get(c, Fraction(0)) for c in range(self.ncols)] for p in self.pivots()]

    def nullspace(self) -> list:
        """Basis of the kernel: one vector per free column, ascending."""
        free = [c for c in range(self.ncols) if c not in self.rows]
        basis = []
        for f in free:
            v = [Fraction(0)] * self.ncols
            v[f] = Fraction(1)
            for p, row in self.rows.items():
                coeff = row.get(f)
                if coeff:
                    v[p] = -coeff
            basis.append(v)
        return basis


def rref(rows, ncols: int) -> RowReducer:
    rr = RowReducer(ncols)
    for r in rows:
        rr.add(r if isinstance(r, dict) else dict(enumerate(r)))
    return rr


def nullspace(rows, ncols: int) -> list:
    return rref(rows, ncols).nullspace()


def rank(vectors) -> int:
    vectors = list(vectors)
    if not vectors:
        return 0
    return rref(vectors, len(vectors[0])).rank


def in_span(basis, v) -> bool:
    """Is ``v`` a rational combination of ``basis``?"""
    if not basis:
        return not any(v)
    rr = rref(basis, len(v))
    return not rr.reduce(dict(enumerate(v)))


def same_span(a, b) -> bool:
    """Mutual membership check of two lists of equal-length vectors."""
    return all(in_span(a, v) for v in b) and all(in_span(b, v) for v in a)


def solve(rows, rhs, ncols: int):
    """One solution of ``rows * u = rhs`` or None if inconsistent (free vars set to 0)."""
    aug = []
    for r, b in zip(rows, rhs):
        d = r if isinstance(r, dict) else dict(enumerate(r))
        d = dict(d)
        if b:
            d[ncols] = Fraction(b)
        aug.append(d)
    rr = rref(aug, ncols + 1)
    if ncols in rr.rows:
        return None
    sol = [Fraction(0)] * ncols
    for p, row in rr.rows.items():
        sol[p] = row.get(ncols, Fraction(0))
    return sol

"""Sparse exact linear algebra over Q with fraction-free integer rows.

Rows are dicts ``column -> int``.  Each stored pivot row is primitive
(content 1) with a positive pivot at its lowest column, so elimination
only ever introduces columns to the right of the one being cleared.
"""
from __future__ import annotations

import heapq
from fractions import Fraction
from functools import reduce
from math import gcd, lcm


def integer_row(row: dict) -> dict:
    """Scale a rational row to a primitive integer row (sign unchanged)."""
    dens = [v.denominator for v in row.values() if isinstance(v, Fraction)]
    scale = reduce(lcm, dens, 1)
    out = {}
    for k, v in row.items():
        v = v * scale
        if v:
            out[k] = int(v)
    return _primitive(out)


def _primitive(row: dict) -> dict:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            return row
    if g > 1:
        return {k: v // g for k, v in row.items()}
    return row


class SparseEchelon:
    """Incrementally maintained echelon form."""

    def __init__(self):
        self.pivots: dict[int, dict] = {}

    def __len__(self):
        return len(self.pivots)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, row: dict) -> dict:
        """Eliminate every pivot column from ``row`` (integer entries)."""
        row = dict(row)
        heap = list(row)
        heapq.heapify(heap)
        pivots = self.pivots
        last = None
        while heap:
            c = heapq.heappop(heap)
            if c == last:
                continue
            last = c
            a = row.get(c)
            if not a:
                continue
            prow = pivots.get(c)
            if prow is None:
                continue
            p = prow[c]
            g = gcd(p, a)
            mp, ma = p // g, a // g
            if mp != 1:
                for k in row:
                    row[k] *= mp
            for k, v in prow.items():
                nv = row.get(k, 0) - ma * v
                if nv:
                    if k not in row:
                        heapq.heappush(heap, k)
                    row[k] = nv
                else:
                    row.pop(k, None)
        return row

    def add(self, row: dict) -> int | None:
        """Insert a row; return its new pivot column, or None if dependent."""
        if not row:
            return None
        if any(isinstance(v, Fraction) for v in row.values()):
            row = integer_row(row)
        r = self.reduce(row)
        if not r:
            return None
        r = _primitive(r)
        c = min(r)
        if r[c] < 0:
            r = {k: -v for k, v in r.items()}
        self.pivots[c] = r
        return c

    def rref(self) -> dict[int, dict]:
        """Fully reduced rows (pivot columns cleared above and below)."""
        done: dict[int, dict] = {}
        for c in sorted(self.pivots, reverse=True):
            row = dict(self.pivots[c])
            for k in sorted(k for k in row if k != c and k in done):
                a = row.get(k)
                if not a:
                    continue
                prow = done[k]
                p = prow[k]
                g = gcd(p, a)
                mp, ma = p // g, a // g
                if mp != 1:
                    for j in row:
                        row[j] *= mp
                for j, v in prow.items():
                    nv = row.get(j, 0) - ma * v
                    if nv:
                        row[j] = nv
                    else:
                        row.pop(j, None)
            row = _primitive(row)
            if row[c] < 0:
                row = {k: -v for k, v in row.items()}
            done[c] = row
        return done

    def null_space(self, ncols: int) -> list[dict]:
        """Basis of the kernel over columns ``0..ncols-1`` in RREF form.

        One vector per free column ``f``: entry 1 at ``f`` and
        ``-R[p][f] / R[p][p]`` at each pivot ``p``.
        """
        R = self.rref()
        by_free: dict[int, list[int]] = {}
        for p, row in R.items():
            for k in row:
                if k != p:
                    by_free.setdefault(k, []).append(p)
        basis = []
        for f in range(ncols):
            if f in R:
                continue
            vec = {f: 1}
            for p in by_free.get(f, ()):
                row = R[p]
                v = Fraction(-row[f], row[p])
                vec[p] = v.numerator if v.denominator == 1 else v
            basis.append(dict(sorted(vec.items())))
        return basis


def solve(rows, ncols: int):
    """Solve ``A y = b`` exactly.

    ``rows`` yields ``(coeffs: dict col->Q, rhs: Q)``.  Returns a particular
    solution ``dict col -> Q`` (free variables set to 0), or None if the
    system is inconsistent.
    """
    ech = SparseEchelon()
    rhs_col = ncols
    for coeffs, b in rows:
        row = {k: v for k, v in coeffs.items() if v}
        if b:
            row[rhs_col] = -b
        if not row:
            continue
        if ech.add(row) == rhs_col:
            return None
    if rhs_col in ech.pivots:
        return None
    R = ech.rref()
    sol = {}
    for p, row in R.items():
        v = row.get(rhs_col)
        if v:
            q = Fraction(-v, row[p])
            sol[p] = q.numerator if q.denominator == 1 else q
    return sol


def rank(matrix) -> int:
    """Exact rank of a dense matrix of rationals."""
    ech = SparseEchelon()
    for r in matrix:
        ech.add({j: v for j, v in enumerate(r) if v})
    return ech.rank

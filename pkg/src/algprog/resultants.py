"""Sylvester matrices and fraction-free resultant computation.

The resultant of two polynomials in a chosen variable is the determinant of
their Sylvester matrix, whose entries live in the remaining variables.  The
determinant is computed by Bareiss' fraction-free elimination: every division
along the way is exact, so no rational-function arithmetic is ever needed.
A plain cofactor expansion is kept around as an independent cross-check for
small matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

from .polycore import MultiPoly, PolyError, VarId, divexact


@dataclass
class PolyMatrix:
    """Dense matrix of polynomials sharing one registry."""

    rows: int
    cols: int
    entries: list[list[MultiPoly]]

    def __post_init__(self) -> None:
        if len(self.entries) != self.rows or any(
            len(r) != self.cols for r in self.entries
        ):
            raise PolyError("matrix shape does not match entries")


def sylvester_matrix(p: MultiPoly, q: MultiPoly, v: VarId) -> PolyMatrix:
    """Sylvester matrix of p (degree d) and q (degree e) in v: (d+e) square.

    The first e rows carry the coefficients of p, each shifted right by one
    column; the next d rows carry those of q.
    """
    d, e = p.degree_in(v), q.degree_in(v)
    if d < 1 or e < 1:
        raise PolyError("sylvester matrix needs positive degrees in the main variable")
    reg = p.registry
    zero = MultiPoly.zero(reg)
    pc = p.coeffs_in(v)
    qc = q.coeffs_in(v)
    n = d + e
    rows: list[list[MultiPoly]] = []
    for i in range(e):
        row = [zero] * n
        for k in range(d + 1):
            row[i + k] = pc.get(d - k, zero)
        rows.append(row)
    for i in range(d):
        row = [zero] * n
        for k in range(e + 1):
            row[i + k] = qc.get(e - k, zero)
        rows.append(row)
    return PolyMatrix(n, n, rows)


def det_bareiss(m: PolyMatrix) -> MultiPoly:
    """Fraction-free determinant; pivots chosen with the fewest terms."""
    if m.rows != m.cols:
        raise PolyError("determinant of a non-square matrix")
    n = m.rows
    a = [row[:] for row in m.entries]
    reg = a[0][0].registry if n else None
    if n == 0:
        raise PolyError("empty matrix")
    sign = 1
    prev = MultiPoly.const(reg, 1)
    for k in range(n - 1):
        # pick the sparsest nonzero pivot in column k to slow coefficient swell
        pivot_row = -1
        best = None
        for i in range(k, n):
            if not a[i][k].is_zero():
                tc = a[i][k].term_count()
                if best is None or tc < best:
                    best, pivot_row = tc, i
        if pivot_row < 0:
            return MultiPoly.zero(reg)
        if pivot_row != k:
            a[k], a[pivot_row] = a[pivot_row], a[k]
            sign = -sign
        pivot = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = pivot * a[i][j] - a[i][k] * a[k][j]
                a[i][j] = divexact(num, prev)
            a[i][k] = MultiPoly.zero(reg)
        prev = pivot
    return a[n - 1][n - 1] * sign


def det_cofactor(m: PolyMatrix) -> MultiPoly:
    """Cofactor-expansion determinant; only sensible for small matrices."""
    if m.rows != m.cols:
        raise PolyError("determinant of a non-square matrix")

    def rec(rows: list[list[MultiPoly]]) -> MultiPoly:
        n = len(rows)
        if n == 1:
            return rows[0][0]
        reg = rows[0][0].registry
        total = MultiPoly.zero(reg)
        for j, head in enumerate(rows[0]):
            if head.is_zero():
                continue
            minor = [r[:j] + r[j + 1 :] for r in rows[1:]]
            sub = rec(minor)
            total = total + head * sub if j % 2 == 0 else total - head * sub
        return total

    return rec([row[:] for row in m.entries])


def resultant(p: MultiPoly, q: MultiPoly, v: VarId) -> MultiPoly:
    """Resultant of p and q with respect to v (both of positive degree)."""
    if p.degree_in(v) < 1 or q.degree_in(v) < 1:
        raise PolyError("resultant needs positive degrees; callers handle constants")
    return det_bareiss(sylvester_matrix(p, q, v))


def resultant_with_constant(p: MultiPoly, q: MultiPoly, v: VarId) -> MultiPoly:
    """Resultant extended by the usual convention res(p, c) = c^deg(p).

    Used where one side may legitimately degenerate to degree 0 in `v`
    (leading-coefficient rows of critical resultants, collapsed factors).
    Both sides degenerate is an error.
    """
    dp, dq = p.degree_in(v), q.degree_in(v)
    if dp < 1 and dq < 1:
        raise PolyError("resultant of two polynomials constant in the variable")
    if dq < 1:
        return q ** dp
    if dp < 1:
        return p ** dq
    return resultant(p, q, v)


def resultant_degree_bound(p: MultiPoly, q: MultiPoly, v: VarId, w: VarId) -> int:
    """Degree bound in `w` for res_v(p, q):  d_p,w * d_q,v + d_p,v * d_q,w."""
    if p.is_zero() or q.is_zero():
        raise PolyError("degree bound of a zero polynomial")
    return max(p.degree_in(w), 0) * max(q.degree_in(v), 0) + max(
        p.degree_in(v), 0
    ) * max(q.degree_in(w), 0)

"""Exact two-phase simplex over rationals for small dense programs.

Solves   minimize c.x   subject to   A x <= b,  x >= 0
with every coefficient a Fraction.  Bland's rule guarantees termination.
Intended for the small systems that appear in embedding searches and as an
independent check on transportation values; no attempt is made at sparse or
revised variants.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import InvalidParameterError
from .numerics import as_fraction

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


def solve_lp(c, A, b):
    """Return (status, x, value); x and value are None unless optimal."""
    c = [as_fraction(v) for v in c]
    A = [[as_fraction(v) for v in row] for row in A]
    b = [as_fraction(v) for v in b]
    m, n = len(A), len(c)
    if len(b) != m or any(len(row) != n for row in A):
        raise InvalidParameterError("inconsistent LP dimensions")

    # Columns: n structural, m slack, then one artificial per negative row.
    neg_rows = [i for i in range(m) if b[i] < 0]
    n_art = len(neg_rows)
    width = n + m + n_art
    T = [[Fraction(0)] * (width + 1) for _ in range(m)]
    basis = [0] * m
    art_cols = {}
    next_art = n + m
    for i in range(m):
        flip = -1 if b[i] < 0 else 1
        for j in range(n):
            T[i][j] = flip * A[i][j]
        T[i][n + i] = Fraction(flip)
        T[i][width] = flip * b[i]
        if flip == -1:
            T[i][next_art] = Fraction(1)
            art_cols[i] = next_art
            basis[i] = next_art
            next_art += 1
        else:
            basis[i] = n + i

    def pivot(row, col):
        piv = T[row][col]
        T[row] = [v / piv for v in T[row]]
        for r in range(m):
            if r != row and T[r][col] != 0:
                f = T[r][col]
                T[r] = [a - f * p for a, p in zip(T[r], T[row])]
        basis[row] = col

    def run(cost, allowed):
        """Bland-rule minimization of cost over columns in `allowed`."""
        while True:
            # reduced costs r_j = cost_j - cost_B . column_j
            red = {}
            for j in allowed:
                if j in basis_set():
                    continue
                r = cost[j]
                for i in range(m):
                    cb = cost[basis[i]]
                    if cb:
                        r -= cb * T[i][j]
                red[j] = r
            entering = None
            for j in sorted(red):
                if red[j] < 0:
                    entering = j
                    break
            if entering is None:
                return OPTIMAL
            leaving, best = None, None
            for i in range(m):
                if T[i][entering] > 0:
                    ratio = T[i][width] / T[i][entering]
                    key = (ratio, basis[i])
                    if best is None or key < best:
                        best, leaving = key, i
            if leaving is None:
                return UNBOUNDED
            pivot(leaving, entering)

    def basis_set():
        return set(basis)

    if n_art:
        cost1 = [Fraction(0)] * (width)
        for col in art_cols.values():
            cost1[col] = Fraction(1)
        run(cost1, list(range(width)))
        value1 = sum(T[i][width] for i in range(m) if basis[i] >= n + m)
        if value1 != 0:
            return INFEASIBLE, None, None
        # drive any degenerate artificial out of the basis
        for i in range(m):
            if basis[i] >= n + m:
                for j in range(n + m):
                    if T[i][j] != 0:
                        pivot(i, j)
                        break

    cost2 = c + [Fraction(0)] * (width - n)
    status = run(cost2, list(range(n + m)))
    if status != OPTIMAL:
        return status, None, None
    x = [Fraction(0)] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i][width]
    value = sum(ci * xi for ci, xi in zip(c, x))
    return OPTIMAL, x, value

"""Exact revised simplex for covering LPs with 0/1 rows.

Solves ``min sum(x)  s.t.  sum(x[r] for r in row) >= 1  for every row,
0 <= x <= 1`` by running the primal simplex on its dual

    max sum(y) - sum(z)
    s.t. sum(y[j] for rows j containing r) - z[r] <= 1   for every variable r
         y, z >= 0

starting from the all-slack basis, which is feasible because every
right-hand side is 1.  The optimal covering solution is the vector of
simplex multipliers.

Arithmetic is exact and fraction-free: the basis inverse is kept as
``adj / det`` with an integer matrix ``adj`` and a positive integer
``det``, updated by integer-preserving (Bareiss) pivoting whose divisions
are always exact.  The entering variable is the lowest-indexed one with
positive reduced cost and ratio-test ties go to the lowest-indexed basic
variable (Bland's rule), so runs are deterministic and cannot cycle.

Dual variable order: ``y_0..y_{m-1}``, ``z_0..z_{R-1}``, slacks ``s_0..s_{R-1}``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix

# int64 pricing is used only while every partial sum stays below this
_SAFE = 1 << 62


class SimplexError(RuntimeError):
    pass


class _Pricer:
    """First row whose multiplier sum falls below ``det`` (y pricing)."""

    def __init__(self, rows, num_vars):
        self.rows = rows
        self.max_len = max(len(r) for r in rows)
        indptr = np.zeros(len(rows) + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(r) for r in rows])
        indices = np.fromiter((r for row in rows for r in row), dtype=np.int64, count=int(indptr[-1]))
        data = np.ones(len(indices), dtype=np.int64)
        self.matrix = csr_matrix((data, indices, indptr), shape=(len(rows), num_vars))

    def first(self, scaled, det):
        peak = max(max(scaled), -min(scaled))
        if peak * self.max_len < _SAFE and det < _SAFE:
            sums = self.matrix @ np.asarray(scaled, dtype=np.int64)
            hits = np.flatnonzero(sums < det)
            return int(hits[0]) if len(hits) else -1
        for j, row in enumerate(self.rows):
            if det > sum(scaled[r] for r in row):
                return j
        return -1


def solve_covering(rows: Sequence[Sequence[int]], num_vars: int, max_pivots: int | None = None):
    """Return ``(x, y, z, pivots)`` for the covering LP above.

    ``rows`` reference variables ``0..num_vars-1``; ``x`` has length
    ``num_vars``, ``y`` one entry per row, ``z`` one per variable, all as
    ``Fraction``.
    """
    m = len(rows)
    R = num_vars
    if m == 0:
        zero = [Fraction(0)] * R
        return zero, [], list(zero), 0
    rows = [tuple(r) for r in rows]
    pricer = _Pricer(rows, R)
    slack0 = m + R
    adj = [[1 if i == k else 0 for k in range(R)] for i in range(R)]
    det = 1
    xb = [1] * R  # det * basic values
    basis = [slack0 + i for i in range(R)]
    cb = [0] * R
    pi = [0] * R  # det * simplex multipliers
    pivots = 0

    while True:
        entering = pricer.first(pi, det)
        if entering < 0:
            for r in range(R):
                if pi[r] > det:
                    entering = m + r
                    break
            else:
                for r in range(R):
                    if pi[r] < 0:
                        entering = slack0 + r
                        break
        if entering < 0:
            break
        if max_pivots is not None and pivots >= max_pivots:
            raise SimplexError("pivot limit reached")

        if entering < m:
            support = rows[entering]
            alpha = [sum(row[r] for r in support) for row in adj]
            cost = 1
        elif entering < slack0:
            r = entering - m
            alpha = [-row[r] for row in adj]
            cost = -1
        else:
            r = entering - slack0
            alpha = [row[r] for row in adj]
            cost = 0

        # ratio xb[i] / alpha[i] over alpha[i] > 0; compare by cross-multiplying
        leave = -1
        for i in range(R):
            a = alpha[i]
            if a > 0:
                if leave < 0:
                    leave = i
                    continue
                lhs = xb[i] * alpha[leave]
                rhs = xb[leave] * a
                if lhs < rhs or (lhs == rhs and basis[i] < basis[leave]):
                    leave = i
        if leave < 0:
            raise SimplexError("dual LP unbounded; the covering LP would be infeasible")

        piv = alpha[leave]
        prow = adj[leave]
        xl = xb[leave]
        for i in range(R):
            if i == leave:
                continue
            a = alpha[i]
            row = adj[i]
            if a:
                for k in range(R):
                    row[k] = (piv * row[k] - a * prow[k]) // det
                xb[i] = (piv * xb[i] - a * xl) // det
            else:
                for k in range(R):
                    if row[k]:
                        row[k] = piv * row[k] // det
                xb[i] = piv * xb[i] // det
        det = piv
        basis[leave] = entering
        cb[leave] = cost
        pi = [0] * R
        for i in range(R):
            c = cb[i]
            if c:
                row = adj[i]
                for k in range(R):
                    if row[k]:
                        pi[k] += c * row[k]
        pivots += 1

    y = [Fraction(0)] * m
    z = [Fraction(0)] * R
    for i, var in enumerate(basis):
        if var < m:
            y[var] = Fraction(xb[i], det)
        elif var < slack0:
            z[var - m] = Fraction(xb[i], det)
    x = [Fraction(p, det) for p in pi]
    return x, y, z, pivots

"""
Dense tableau simplex for small problems of the form

    maximize    c @ x
    subject to  A @ x <= b,  x >= 0,  with b >= 0.

The slack basis is feasible because ``b >= 0``, so a single phase suffices.
Entering and leaving variables follow Bland's rule, which cannot cycle.
"""
from __future__ import annotations

import numpy as np

from .errors import LpNumericalFailure

PIVOT_TOL = 1e-11


def simplex_max(c, A, b, max_iter: int | None = None):
    """Solve the LP above and return ``(x, objective)``.

    Raises
    ------
    LpNumericalFailure
        If ``b`` has negative entries, the problem is unbounded, or the
        iteration cap is hit.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if np.any(b < 0):
        raise LpNumericalFailure("right-hand side must be nonnegative for the slack basis")
    if max_iter is None:
        max_iter = 50 * (m + n) + 100

    # tableau rows: constraints, then reduced costs; last column is the rhs
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -c
    basis = np.arange(n, n + m)

    for _ in range(max_iter):
        reduced = T[m, :-1]
        candidates = np.flatnonzero(reduced < -PIVOT_TOL)
        if candidates.size == 0:
            break
        col = int(candidates[0])
        column = T[:m, col]
        pos = column > PIVOT_TOL
        if not np.any(pos):
            raise LpNumericalFailure("LP is unbounded")
        ratios = np.full(m, np.inf)
        ratios[pos] = T[:m, -1][pos] / column[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + PIVOT_TOL * max(1.0, abs(best)))
        # Bland: among tied rows leave the basic variable with smallest index
        row = int(ties[np.argmin(basis[ties])])
        T[row] /= T[row, col]
        pivot_row = T[row].copy()
        T -= np.outer(T[:, col], pivot_row)
        T[row] = pivot_row
        basis[row] = col
    else:
        raise LpNumericalFailure(f"simplex did not converge in {max_iter} pivots")

    x = np.zeros(n + m)
    x[basis] = T[:m, -1]
    return x[:n], float(T[m, -1])

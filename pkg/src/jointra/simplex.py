"""Two-phase dense-tableau simplex for ``max c.x, A_eq x = b_eq, A_le x <= b_le, x >= 0``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels


@dataclass
class LpResult:
    status: str
    value: float
    x: np.ndarray | None
    iterations: int


def solve_lp(c, a_eq, a_le, b_eq=None, b_le=None, tol: float = 1e-9,
             max_iter: int | None = None, bland_after: int = 50, backend=None) -> LpResult:
    """Solve the LP with artificials on equality rows and slacks on the rest.

    ``b_eq``/``b_le`` default to all ones (the set-partitioning right-hand
    side) and must be nonnegative.  ``backend`` selects a kernel module;
    default is the one chosen at import.
    """
    k = backend or kernels
    c = np.asarray(c, dtype=float)
    n = c.size
    a_eq = np.asarray(a_eq, dtype=float).reshape(-1, n)
    a_le = np.asarray(a_le, dtype=float).reshape(-1, n)
    m_eq, m_le = a_eq.shape[0], a_le.shape[0]
    b_eq = np.ones(m_eq) if b_eq is None else np.asarray(b_eq, dtype=float)
    b_le = np.ones(m_le) if b_le is None else np.asarray(b_le, dtype=float)
    if np.any(b_eq < 0) or np.any(b_le < 0):
        raise ValueError("right-hand sides must be nonnegative")
    m = m_eq + m_le
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000

    n_struct = n + m_le
    t = np.zeros((m + 1, n_struct + m_eq + 1))
    t[:m_eq, :n] = a_eq
    t[m_eq:m, :n] = a_le
    t[m_eq:m, n:n_struct] = np.eye(m_le)
    t[:m_eq, n_struct:n_struct + m_eq] = np.eye(m_eq)
    t[:m_eq, -1] = b_eq
    t[m_eq:m, -1] = b_le
    basis = np.concatenate([np.arange(n_struct, n_struct + m_eq),
                            np.arange(n, n_struct)]).astype(np.intp)
    iterations = 0

    if m_eq:
        t[m, :n] = -a_eq.sum(axis=0)
        t[m, -1] = -b_eq.sum()
        status, it = k.simplex_iterate(t, basis, n_struct, tol, max_iter, bland_after)
        iterations += it
        if status == kernels.ITERATION_LIMIT:
            return LpResult("iteration-limit", float("nan"), None, iterations)
        if -t[m, -1] > 1e-7 * max(1.0, b_eq.sum()):
            return LpResult("infeasible", float("-inf"), None, iterations)
        keep = np.ones(m + 1, dtype=bool)
        for r in np.flatnonzero(basis >= n_struct):
            nz = np.flatnonzero(np.abs(t[r, :n_struct]) > tol)
            if nz.size:
                k.pivot(t, int(r), int(nz[0]))
                basis[r] = nz[0]
            else:
                keep[r] = False
        t = np.ascontiguousarray(np.concatenate([t[keep, :n_struct], t[keep, -1:]], axis=1))
        basis = np.ascontiguousarray(basis[keep[:m]])
        m = t.shape[0] - 1

    cost = np.concatenate([-c, np.zeros(m_le), [0.0]])
    t[m] = cost - cost[basis] @ t[:m]
    status, it = k.simplex_iterate(t, basis, n_struct, tol, max_iter, bland_after)
    iterations += it
    if status == kernels.UNBOUNDED:
        return LpResult("unbounded", float("inf"), None, iterations)
    if status == kernels.ITERATION_LIMIT:
        return LpResult("iteration-limit", float("nan"), None, iterations)
    x = np.zeros(n_struct)
    x[basis] = t[:m, -1]
    return LpResult("optimal", float(t[m, -1]), x[:n], iterations)

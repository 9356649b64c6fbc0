"""Small dense two-phase simplex with Bland's anti-cycling rule.

Solves ``min c @ x`` subject to ``A_ub @ x <= b_ub``, ``A_eq @ x == b_eq``,
``x >= 0``. Intended for a few hundred variables at most.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-12


class LPError(RuntimeError):
    pass


class Infeasible(LPError):
    pass


class Unbounded(LPError):
    pass


@dataclass(frozen=True)
class SimplexResult:
    x: np.ndarray
    value: float
    pivots: int


def _pivot(T: np.ndarray, basis: list[int], row: int, col: int) -> None:
    T[row] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.0:
            T[r] -= T[r, col] * T[row]
    basis[row] = col


def _run(T: np.ndarray, basis: list[int], allowed: np.ndarray, max_pivots: int) -> int:
    """Pivot on the tableau whose last row holds reduced costs. Returns pivot count."""
    m = T.shape[0] - 1
    pivots = 0
    while True:
        cost = T[-1, :-1]
        scale = max(1.0, float(np.max(np.abs(cost))))
        cand = np.nonzero((cost < -PIVOT_TOL * scale) & allowed)[0]
        if cand.size == 0:
            return pivots
        col = int(cand[0])  # Bland: lowest index enters
        column = T[:m, col]
        pos = column > PIVOT_TOL
        if not np.any(pos):
            raise Unbounded("objective unbounded below")
        ratios = np.full(m, np.inf)
        ratios[pos] = T[:m, -1][pos] / column[pos]
        best = ratios.min()
        ties = np.nonzero(ratios <= best + PIVOT_TOL * max(1.0, abs(best)))[0]
        # Bland: among tied rows, the lowest basic variable leaves
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(T, basis, row, col)
        pivots += 1
        if pivots > max_pivots:
            raise LPError("pivot limit exceeded")


def simplex(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, max_pivots: int = 50_000) -> SimplexResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq

    # columns: x | slacks | artificials | rhs
    A = np.zeros((m, n + m_ub))
    A[:m_ub, :n] = A_ub
    A[:m_ub, n:] = np.eye(m_ub)
    A[m_ub:, :n] = A_eq
    rhs = np.concatenate([b_ub, b_eq])
    neg = rhs < 0
    A[neg] *= -1
    rhs = np.abs(rhs)

    basis: list[int] = []
    art_rows = []
    for r in range(m):
        if r < m_ub and not neg[r]:
            basis.append(n + r)
        else:
            art_rows.append(r)
            basis.append(-1)
    n_art = len(art_rows)
    width = n + m_ub + n_art
    T = np.zeros((m + 1, width + 1))
    T[:m, : n + m_ub] = A
    T[:m, -1] = rhs
    for j, r in enumerate(art_rows):
        T[r, n + m_ub + j] = 1.0
        basis[r] = n + m_ub + j

    pivots = 0
    if n_art:
        # phase 1: minimize the sum of artificials
        T[-1, :] = 0.0
        T[-1, n + m_ub:width] = 1.0
        for r in art_rows:
            T[-1] -= T[r]
        pivots += _run(T, basis, np.ones(width, dtype=bool), max_pivots)
        if -T[-1, -1] > 1e-9 * max(1.0, float(np.max(np.abs(rhs)))):
            raise Infeasible("no feasible point")
        # drive artificials out of the basis where possible
        for r in range(m):
            if basis[r] >= n + m_ub:
                nz = np.nonzero(np.abs(T[r, : n + m_ub]) > PIVOT_TOL)[0]
                if nz.size:
                    _pivot(T, basis, r, int(nz[0]))
                    pivots += 1

    allowed = np.zeros(width, dtype=bool)
    allowed[: n + m_ub] = True
    T[-1, :] = 0.0
    T[-1, :n] = c
    for r in range(m):
        if basis[r] < width:
            T[-1] -= T[-1, basis[r]] * T[r]
    pivots += _run(T, basis, allowed, max_pivots)

    x = np.zeros(width)
    for r in range(m):
        x[basis[r]] = T[r, -1]
    x = x[:n]
    return SimplexResult(x, float(c @ x), pivots)

"""
Dense two-phase tableau simplex for small linear programs.

    minimize c^T x  subject to  A x = b,  x >= 0

Pivoting follows Bland's rule: the entering column is the lowest-index
column with a negative reduced cost, and ratio-test ties leave by the
lowest-index basic variable. Artificial columns stay in the tableau after
phase 1, so their reduced costs give the dual multipliers.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from core.exceptions import NumericalFailure

logger = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LPResult:
    status: str
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    duals: Optional[np.ndarray] = None
    iterations: int = 0


class DenseSimplex:
    def __init__(self, A, b, c, tol: float = 1e-9, max_iterations: Optional[int] = None):
        A = np.array(A, dtype=float)
        b = np.array(b, dtype=float)
        self.c = np.array(c, dtype=float)
        self.m, self.n = A.shape
        self.tol = tol
        self.max_iterations = max_iterations if max_iterations is not None else 50 * (self.m + self.n)
        self.iterations = 0

        # rhs must start non-negative for the artificial basis
        self.row_sign = np.where(b < 0, -1.0, 1.0)
        A *= self.row_sign[:, None]
        b *= self.row_sign

        self.tableau = np.zeros((self.m + 1, self.n + self.m + 1))
        self.tableau[:self.m, :self.n] = A
        self.tableau[:self.m, self.n:self.n + self.m] = np.eye(self.m)
        self.tableau[:self.m, -1] = b
        self.basis: List[int] = list(range(self.n, self.n + self.m))

    def pivot(self, row: int, col: int) -> None:
        T = self.tableau
        pivot_row = T[row] / T[row, col]
        T -= np.outer(T[:, col], pivot_row)
        T[row] = pivot_row
        self.basis[row] = col
        self.iterations += 1
        if self.iterations > self.max_iterations:
            raise NumericalFailure(f"Simplex exceeded {self.max_iterations} pivots; worth values may be "
                                   f"ill-conditioned")

    def _set_objective(self, cost: np.ndarray) -> None:
        T = self.tableau
        T[-1, :-1] = cost
        T[-1, -1] = 0.0
        for row, var in enumerate(self.basis):
            if cost[var] != 0.0:
                T[-1] -= cost[var] * T[row]

    def _entering(self, n_cols: int) -> Optional[int]:
        negative = np.flatnonzero(self.tableau[-1, :n_cols] < -self.tol)
        return int(negative[0]) if negative.size else None

    def _leaving(self, col: int) -> Optional[int]:
        column = self.tableau[:self.m, col]
        rows = np.flatnonzero(column > self.tol)
        if rows.size == 0:
            return None
        ratios = self.tableau[rows, -1] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + self.tol]
        return int(min(tied, key=lambda r: self.basis[r]))

    def _iterate(self, n_cols: int) -> str:
        while True:
            col = self._entering(n_cols)
            if col is None:
                return OPTIMAL
            row = self._leaving(col)
            if row is None:
                return UNBOUNDED
            self.pivot(row, col)

    def _drive_out_artificials(self) -> None:
        for row, var in enumerate(self.basis):
            if var < self.n:
                continue
            candidates = np.flatnonzero(np.abs(self.tableau[row, :self.n]) > self.tol)
            if candidates.size:
                self.pivot(row, int(candidates[0]))
            else:
                logger.debug(f"Row {row} is redundant; its artificial stays basic at zero")

    def phase_one(self) -> bool:
        cost = np.concatenate([np.zeros(self.n), np.ones(self.m)])
        self._set_objective(cost)
        self._iterate(self.n + self.m)
        infeasibility = -self.tableau[-1, -1]
        scale = max(1.0, float(np.abs(self.tableau[:self.m, -1]).max(initial=0.0)))
        if infeasibility > self.tol * scale:
            logger.debug(f"Phase 1 ended with infeasibility {infeasibility:.3e}")
            return False
        self._drive_out_artificials()
        return True

    def solve(self) -> LPResult:
        if not self.phase_one():
            return LPResult(status=INFEASIBLE, iterations=self.iterations)

        cost = np.concatenate([self.c, np.zeros(self.m)])
        self._set_objective(cost)
        status = self._iterate(self.n)
        if status == UNBOUNDED:
            return LPResult(status=UNBOUNDED, iterations=self.iterations)

        x = np.zeros(self.n)
        for row, var in enumerate(self.basis):
            if var < self.n:
                x[var] = self.tableau[row, -1]
        duals = -self.tableau[-1, self.n:self.n + self.m] * self.row_sign
        logger.debug(f"Simplex optimal after {self.iterations} pivots")
        return LPResult(status=OPTIMAL, x=x, objective=float(self.c @ x), duals=duals,
                        iterations=self.iterations)


def simplex_minimize(A, b, c, tol: float = 1e-9, max_iterations: Optional[int] = None) -> LPResult:
    return DenseSimplex(A, b, c, tol=tol, max_iterations=max_iterations).solve()

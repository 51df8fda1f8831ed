"""Dense bounded-variable revised simplex.

Phase 1 adds one artificial column per row and minimises their sum; phase 2
minimises the true cost with the artificials pinned to zero. Nonbasic
variables always sit exactly on a bound (or at zero when free), so every
optimal answer is a vertex with at most ``n_rows`` variables strictly inside
their bounds.

Entering variable: largest reduced-cost violation, lowest index on ties.
After ``degeneracy_threshold`` consecutive zero-length steps the rule
switches to Bland's (lowest eligible index) until a step makes progress.
The basis inverse is updated by elementary row operations and recomputed
from scratch every ``refactor_every`` pivots.
"""

from __future__ import annotations

import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from handsoff.errors import SimplexError
from handsoff.lp.models import LinearProgram, LpSolution, LpStatus

__all__ = ["RevisedSimplex", "solve", "check_feasible"]

logger = logging.getLogger(__name__)

# Nonbasic position codes.
_BASIC = 0
_AT_LOWER = 1
_AT_UPPER = 2
_FREE = 3

_PIVOT_TOL = 1e-11
_STEP_TOL = 1e-12


class RevisedSimplex:
    """One solver instance owns its workspace; run instances concurrently, not calls.

    Usage::

        engine = RevisedSimplex()
        solution = engine.solve(problem)
        if solution.is_optimal:
            ...
    """

    def __init__(
        self,
        feasibility_tol: float = 1e-8,
        optimality_tol: float = 1e-9,
        refactor_every: int = 50,
        degeneracy_threshold: int = 50,
        max_iterations: Optional[int] = None,
    ) -> None:
        self.feasibility_tol = feasibility_tol
        self.optimality_tol = optimality_tol
        self.refactor_every = refactor_every
        self.degeneracy_threshold = degeneracy_threshold
        self.max_iterations = max_iterations

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------

    def solve(self, problem: LinearProgram) -> LpSolution:
        """Solve *problem*; infeasible/unbounded are reported via ``status``."""
        self._setup(problem)
        feasible, _ = self._phase_one()
        if not feasible:
            logger.debug("Phase 1 ended with infeasibility %.3e", self._artificial_sum())
            return LpSolution(
                status=LpStatus.infeasible,
                values=self._x[: self._m].copy(),
                objective=float("nan"),
                iterations=self._iterations,
            )

        self._retire_artificials()
        cost = np.concatenate([problem.cost, np.zeros(self._r)])
        status = self._iterate(cost)
        values = self._x[: self._m].copy()
        duals = self._B_inv.T @ cost[self._basis]
        reduced = problem.cost - problem.eq_matrix.T @ duals
        objective = float(problem.cost @ values)
        if status is LpStatus.unbounded:
            objective = float("-inf")
        logger.debug(
            "Simplex finished: status=%s objective=%.12g iterations=%d",
            status.value,
            objective,
            self._iterations,
        )
        return LpSolution(
            status=status,
            values=values,
            objective=objective,
            basis=tuple(sorted(int(j) for j in self._basis if j < self._m)),
            duals=duals,
            reduced_costs=reduced,
            iterations=self._iterations,
            dual_objective=_dual_objective(problem, duals, reduced, values),
        )

    def check_feasible(
        self,
        eq_matrix: np.ndarray,
        eq_rhs: Sequence[float],
        lower: Sequence[float],
        upper: Sequence[float],
    ) -> Tuple[bool, float]:
        """Phase 1 only; return ``(feasible, ‖A v - b‖∞)`` at the phase-1 point."""
        a = np.atleast_2d(np.asarray(eq_matrix, dtype=float))
        problem = LinearProgram(np.zeros(a.shape[1]), a, eq_rhs, lower, upper)
        self._setup(problem)
        feasible, residual = self._phase_one()
        return feasible, residual

    # ------------------------------------------------------------------
    # Workspace
    # ------------------------------------------------------------------

    def _setup(self, problem: LinearProgram) -> None:
        m, r = problem.n_vars, problem.n_rows
        self._problem = problem
        self._m, self._r = m, r
        self._iterations = 0
        self._pivots = 0
        self._degenerate_run = 0
        self._limit = self.max_iterations or 50 * (m + r) + 1000

        lower, upper = problem.lower, problem.upper
        x = np.zeros(m + r)
        state = np.full(m + r, _BASIC, dtype=np.int8)
        for j in range(m):
            if np.isfinite(lower[j]):
                x[j], state[j] = lower[j], _AT_LOWER
            elif np.isfinite(upper[j]):
                x[j], state[j] = upper[j], _AT_UPPER
            else:
                x[j], state[j] = 0.0, _FREE

        residual = problem.eq_rhs - problem.eq_matrix @ x[:m]
        signs = np.where(residual >= 0.0, 1.0, -1.0)
        self._A = np.hstack([problem.eq_matrix, np.diag(signs)])
        self._lower = np.concatenate([lower, np.zeros(r)])
        self._upper = np.concatenate([upper, np.full(r, np.inf)])
        x[m:] = np.abs(residual)
        self._x = x
        self._state = state
        self._basis = np.arange(m, m + r)
        self._B_inv = np.diag(signs)

    def _artificial_sum(self) -> float:
        return float(np.sum(self._x[self._m:]))

    def _phase_one(self) -> Tuple[bool, float]:
        cost = np.concatenate([np.zeros(self._m), np.ones(self._r)])
        if self._r > 0:
            self._iterate(cost)
        problem = self._problem
        residual = 0.0
        if self._r > 0:
            residual = float(np.max(np.abs(problem.eq_matrix @ self._x[: self._m] - problem.eq_rhs)))
        scale = 1.0 + float(np.max(np.abs(problem.eq_rhs), initial=0.0))
        feasible = self._artificial_sum() <= self.feasibility_tol * scale
        return feasible, residual

    def _retire_artificials(self) -> None:
        """Pin artificials at zero and pivot basic ones out where possible."""
        m = self._m
        self._upper[m:] = 0.0
        self._x[m:] = np.where(self._state[m:] == _BASIC, self._x[m:], 0.0)
        for row in range(self._r):
            var = self._basis[row]
            if var < m:
                continue
            self._x[var] = 0.0
            tableau_row = self._B_inv[row] @ self._A[:, :m]
            candidates = np.flatnonzero(
                (self._state[:m] != _BASIC) & (np.abs(tableau_row) > 1e-9)
            )
            if candidates.size == 0:
                logger.debug("Row %d is redundant; artificial stays basic at zero", row)
                continue
            entering = int(candidates[np.argmax(np.abs(tableau_row[candidates]))])
            alpha = self._B_inv @ self._A[:, entering]
            self._pivot(row, entering, alpha, _AT_LOWER)

    # ------------------------------------------------------------------
    # Iteration
    # ------------------------------------------------------------------

    def _iterate(self, cost: np.ndarray) -> LpStatus:
        bland = False
        tol = self.optimality_tol
        while True:
            if self._iterations >= self._limit:
                raise SimplexError(f"simplex iteration limit {self._limit} reached")

            y = self._B_inv.T @ cost[self._basis]
            d = cost - self._A.T @ y
            state = self._state
            increase = ((state == _AT_LOWER) & (d < -tol)) | ((state == _FREE) & (d < -tol))
            decrease = ((state == _AT_UPPER) & (d > tol)) | ((state == _FREE) & (d > tol))
            # fixed variables never move
            movable = self._upper > self._lower
            eligible = (increase | decrease) & movable
            candidates = np.flatnonzero(eligible)
            if candidates.size == 0:
                return LpStatus.optimal

            if bland:
                entering = int(candidates[0])
            else:
                entering = int(candidates[np.argmax(np.abs(d[candidates]))])
            sigma = 1.0 if increase[entering] else -1.0

            alpha = self._B_inv @ self._A[:, entering]
            step, leave_row, leave_state = self._ratio_test(alpha, sigma)
            flip = self._upper[entering] - self._lower[entering]

            if not np.isfinite(step) and not np.isfinite(flip):
                logger.debug("Unbounded ray along variable %d", entering)
                return LpStatus.unbounded

            self._iterations += 1
            if flip <= step:
                self._x[self._basis] -= flip * sigma * alpha
                if sigma > 0:
                    self._x[entering] = self._upper[entering]
                    self._state[entering] = _AT_UPPER
                else:
                    self._x[entering] = self._lower[entering]
                    self._state[entering] = _AT_LOWER
                moved = flip
            else:
                self._x[self._basis] -= step * sigma * alpha
                self._x[entering] += sigma * step
                self._pivot(leave_row, entering, alpha, leave_state)
                moved = step

            if moved <= _STEP_TOL:
                self._degenerate_run += 1
                if not bland and self._degenerate_run >= self.degeneracy_threshold:
                    logger.debug("Switching to Bland's rule after %d degenerate steps", self._degenerate_run)
                    bland = True
            else:
                self._degenerate_run = 0
                bland = False

    def _ratio_test(self, alpha: np.ndarray, sigma: float) -> Tuple[float, int, int]:
        """Longest step before a basic variable hits a bound.

        Ties go to the basic variable with the lowest index.
        """
        best, best_row, best_state = np.inf, -1, _AT_LOWER
        basis = self._basis
        for row in range(self._r):
            rate = sigma * alpha[row]
            var = basis[row]
            if rate > _PIVOT_TOL:
                bound = self._lower[var]
                if not np.isfinite(bound):
                    continue
                limit = max((self._x[var] - bound) / rate, 0.0)
                hit = _AT_LOWER
            elif rate < -_PIVOT_TOL:
                bound = self._upper[var]
                if not np.isfinite(bound):
                    continue
                limit = max((bound - self._x[var]) / (-rate), 0.0)
                hit = _AT_UPPER
            else:
                continue
            if limit < best or (limit == best and var < basis[best_row]):
                best, best_row, best_state = limit, row, hit
        return best, best_row, best_state

    def _pivot(self, row: int, entering: int, alpha: np.ndarray, leave_state: int) -> None:
        leaving = int(self._basis[row])
        self._x[leaving] = self._lower[leaving] if leave_state == _AT_LOWER else self._upper[leaving]
        self._state[leaving] = leave_state
        self._state[entering] = _BASIC
        self._basis[row] = entering

        pivot = alpha[row]
        self._B_inv[row] /= pivot
        for i in range(self._r):
            if i != row and alpha[i] != 0.0:
                self._B_inv[i] -= alpha[i] * self._B_inv[row]

        self._pivots += 1
        if self._pivots % self.refactor_every == 0:
            self._refactor()

    def _refactor(self) -> None:
        basis_matrix = self._A[:, self._basis]
        try:
            self._B_inv = np.linalg.inv(basis_matrix)
        except np.linalg.LinAlgError as exc:
            raise SimplexError(f"singular basis during refactorization: {exc}") from None
        nonbasic = self._state != _BASIC
        rhs = self._problem.eq_rhs - self._A[:, nonbasic] @ self._x[nonbasic]
        self._x[self._basis] = self._B_inv @ rhs


def _dual_objective(
    problem: LinearProgram, duals: np.ndarray, reduced: np.ndarray, values: np.ndarray
) -> float:
    """``bᵀy + Σ_j d_j · bound_j`` with the bound picked by the sign of ``d_j``."""
    bound = np.where(reduced > 0.0, problem.lower, problem.upper)
    terms = reduced * np.where(np.isfinite(bound), bound, values)
    return float(problem.eq_rhs @ duals + np.sum(terms))


def solve(problem: LinearProgram, **options) -> LpSolution:
    """Solve *problem* with a fresh :class:`RevisedSimplex`."""
    return RevisedSimplex(**options).solve(problem)


def check_feasible(eq_matrix, eq_rhs, lower, upper, **options) -> Tuple[bool, float]:
    """Return ``(feasible, max residual)`` using phase 1 only."""
    return RevisedSimplex(**options).check_feasible(eq_matrix, eq_rhs, lower, upper)

"""Linear program and solution types for the dense simplex engine.

Problems have the form ``min cᵀv  s.t.  A v = b,  l <= v <= u`` with
infinite bounds allowed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

import numpy as np

from handsoff.errors import SimplexError

__all__ = ["LpStatus", "LinearProgram", "LpSolution"]


class LpStatus(Enum):
    """Outcome of a simplex run."""

    optimal = "optimal"
    infeasible = "infeasible"
    unbounded = "unbounded"


@dataclass(frozen=True, eq=False)
class LinearProgram:
    cost: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        cost = np.asarray(self.cost, dtype=float).reshape(-1)
        a = np.atleast_2d(np.asarray(self.eq_matrix, dtype=float))
        b = np.asarray(self.eq_rhs, dtype=float).reshape(-1)
        lower = np.asarray(self.lower, dtype=float).reshape(-1)
        upper = np.asarray(self.upper, dtype=float).reshape(-1)
        m = cost.size
        if a.shape != (b.size, m):
            raise SimplexError(
                f"eq_matrix must be {b.size}x{m} to match eq_rhs and cost, got {a.shape}"
            )
        if lower.size != m or upper.size != m:
            raise SimplexError(f"bounds must have length {m}")
        if not (np.all(np.isfinite(cost)) and np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise SimplexError("cost, eq_matrix and eq_rhs must be finite")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise SimplexError("bounds must not be NaN")
        if np.any(lower > upper):
            bad = int(np.argmax(lower > upper))
            raise SimplexError(f"lower > upper for variable {bad}")
        if np.any(lower == np.inf) or np.any(upper == -np.inf):
            raise SimplexError("lower bounds cannot be +inf and upper bounds cannot be -inf")
        for name, value in (("cost", cost), ("eq_matrix", a), ("eq_rhs", b), ("lower", lower), ("upper", upper)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def n_vars(self) -> int:
        return int(self.cost.size)

    @property
    def n_rows(self) -> int:
        return int(self.eq_rhs.size)


@dataclass
class LpSolution:
    status: LpStatus
    values: np.ndarray
    objective: float
    basis: Tuple[int, ...] = ()
    duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    reduced_costs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0
    dual_objective: float = float("nan")

    @property
    def is_optimal(self) -> bool:
        return self.status is LpStatus.optimal

    def residual(self, problem: LinearProgram) -> float:
        """``‖A v - b‖∞`` for this solution."""
        if problem.n_rows == 0:
            return 0.0
        return float(np.max(np.abs(problem.eq_matrix @ self.values - problem.eq_rhs)))

    def bound_violation(self, problem: LinearProgram) -> float:
        below = np.max(problem.lower - self.values, initial=0.0)
        above = np.max(self.values - problem.upper, initial=0.0)
        return float(max(below, above, 0.0))

    def interior_count(self, problem: LinearProgram) -> int:
        """Variables strictly between their bounds; at most ``n_rows`` at a vertex."""
        inside = (self.values > problem.lower) & (self.values < problem.upper)
        return int(np.count_nonzero(inside))

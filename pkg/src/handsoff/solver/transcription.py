"""Direct transcription of the terminal constraint.

A piecewise-constant control ``u`` on ``N`` intervals reaches the origin from
``ξ`` exactly when ``G u = -ξ`` with ``G`` from
:func:`handsoff.linalg.build_constraint_matrix`. The sparse solvers work on
the split form ``u = u⁺ - u⁻`` with ``u⁺, u⁻ ∈ [0, 1]^N``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from handsoff.core.signal import ControlSignal
from handsoff.core.system import LtiSystem
from handsoff.errors import InvalidSystemError
from handsoff.linalg.matexp import ConstraintMatrix, build_constraint_matrix
from handsoff.lp.models import LinearProgram

__all__ = ["TranscribedProblem", "transcribe"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TranscribedProblem:
    """Feasibility constraint ``G u = -ξ, |u_k| <= 1`` for one (system, ξ, T, N)."""

    system: LtiSystem
    xi: np.ndarray
    horizon: float
    n_intervals: int
    constraint: ConstraintMatrix

    def __post_init__(self) -> None:
        xi = np.array(self.system.check_state(self.xi), dtype=float)
        xi.setflags(write=False)
        object.__setattr__(self, "xi", xi)
        if self.constraint.n_intervals != self.n_intervals or self.constraint.horizon != self.horizon:
            raise InvalidSystemError("constraint matrix was built for a different grid")

    @property
    def n(self) -> int:
        return self.system.n

    @property
    def delta(self) -> float:
        return self.horizon / self.n_intervals

    @property
    def rhs(self) -> np.ndarray:
        return -self.xi

    @property
    def g(self) -> np.ndarray:
        return self.constraint.g

    def residual(self, values: np.ndarray) -> float:
        """``‖G u + ξ‖∞`` for sample vector *values*."""
        return float(np.max(np.abs(self.constraint.apply(values) + self.xi), initial=0.0))

    def residual_tolerance(self, tol: float = 1e-8) -> float:
        return tol * (1.0 + float(np.max(np.abs(self.xi), initial=0.0)))

    def signal(self, values: np.ndarray) -> ControlSignal:
        return ControlSignal(self.horizon, values)

    def split_program(
        self,
        weights: Optional[np.ndarray] = None,
        cost: Optional[np.ndarray] = None,
        lower: Optional[np.ndarray] = None,
        upper: Optional[np.ndarray] = None,
    ) -> LinearProgram:
        """LP over ``v = [u⁺; u⁻]``.

        Args:
            weights: Per-sample weights ``w_k``; the cost is ``Δ Σ w_k (u⁺_k + u⁻_k)``.
            cost: Full length-``2N`` cost vector, overriding *weights*.
            lower: Length-``2N`` lower bounds (default zeros).
            upper: Length-``2N`` upper bounds (default ones).
        """
        size = self.n_intervals
        if cost is None:
            w = np.ones(size) if weights is None else np.asarray(weights, dtype=float)
            cost = self.delta * np.concatenate([w, w])
        return LinearProgram(
            cost=cost,
            eq_matrix=np.hstack([self.g, -self.g]),
            eq_rhs=self.rhs,
            lower=np.zeros(2 * size) if lower is None else lower,
            upper=np.ones(2 * size) if upper is None else upper,
        )

    def unsplit(self, values: np.ndarray) -> np.ndarray:
        """Map ``[u⁺; u⁻]`` back to ``u``."""
        size = self.n_intervals
        return values[:size] - values[size:]


def transcribe(
    sys: LtiSystem, xi: Sequence[float], horizon: float, n_intervals: int
) -> TranscribedProblem:
    """Build the transcription of ``U(ξ)`` on a uniform ``n_intervals`` grid."""
    constraint = build_constraint_matrix(sys, horizon, n_intervals)
    problem = TranscribedProblem(
        system=sys,
        xi=np.asarray(xi, dtype=float),
        horizon=float(horizon),
        n_intervals=int(n_intervals),
        constraint=constraint,
    )
    logger.debug("Transcribed %s with xi=%s on %d intervals", sys.label or "system", problem.xi, n_intervals)
    return problem

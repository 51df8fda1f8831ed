"""Sparse solvers for the transcribed hands-off problem.

* :func:`solve_l1` returns a vertex of the L1 (minimum-fuel) linear program.
* :func:`solve_max_handsoff` turns that vertex into a bang-off-bang control:
  a second LP over the L1-optimal face picks the most compact support, then
  the remaining fractional samples are polished.
* :func:`solve_reweighted_lp` is the iteratively reweighted L1 surrogate for
  the concave ``‖u‖_p^p`` objective.

``value``/``value_with_dual`` expose the L1 optimum, which equals the L0
optimum on the reachable set, and ``is_reachable`` is the phase-1 membership
test for that set.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from handsoff.config import Settings
from handsoff.core.signal import ControlSignal, l0_norm
from handsoff.core.system import LtiSystem
from handsoff.errors import NotReachableError, SimplexError
from handsoff.lp.models import LinearProgram, LpSolution, LpStatus
from handsoff.lp.simplex import RevisedSimplex
from handsoff.solver.polish import fractional_indices, polish
from handsoff.solver.transcription import TranscribedProblem, transcribe

__all__ = [
    "SolveMethod",
    "SparseSolveResult",
    "solve_l1",
    "solve_max_handsoff",
    "solve_reweighted_lp",
    "value",
    "value_with_dual",
    "is_reachable",
    "phase_one_feasible",
]

logger = logging.getLogger(__name__)

_DEFAULT_SETTINGS = Settings()


class SolveMethod(Enum):
    l1_vertex = "l1_vertex"
    reweighted_lp = "reweighted_lp"


@dataclass
class SparseSolveResult:
    """Control returned by a sparse solver plus the numbers needed to audit it.

    ``l1_value`` is the optimum of the unweighted L1 program (the ``V1(ξ)``
    estimate); ``lp_objective`` is the objective of the last LP actually
    solved, which differs for the face and reweighted programs.
    """

    control: ControlSignal
    l1_value: float
    l0_value: float
    fractional_count: int
    method: SolveMethod
    iterations: int
    lp_objective: float = float("nan")
    converged: bool = True
    dual: np.ndarray = field(default_factory=lambda: np.zeros(0))
    residual: float = 0.0

    @property
    def support(self):
        return self.control.support_intervals()

    def summary(self) -> dict:
        return {
            "method": self.method.value,
            "l0": self.l0_value,
            "l1": self.l1_value,
            "fractional_count": self.fractional_count,
            "iterations": self.iterations,
            "converged": self.converged,
            "residual": self.residual,
        }


def _engine(settings: Settings) -> RevisedSimplex:
    return RevisedSimplex(
        feasibility_tol=settings.feasibility_tol,
        optimality_tol=settings.optimality_tol,
        refactor_every=settings.refactor_every,
        degeneracy_threshold=settings.degeneracy_threshold,
    )


def _solve_lp(problem: TranscribedProblem, lp: LinearProgram, settings: Settings) -> LpSolution:
    solution = _engine(settings).solve(lp)
    if solution.status is LpStatus.infeasible:
        raise NotReachableError(problem.xi, problem.horizon)
    if solution.status is not LpStatus.optimal:
        # every variable is boxed, so an unbounded ray is an engine fault
        raise SimplexError(f"transcribed LP ended with status {solution.status.value}")
    return solution


def _result(
    problem: TranscribedProblem,
    values: np.ndarray,
    l1_value: float,
    method: SolveMethod,
    iterations: int,
    settings: Settings,
    lp_objective: float,
    dual: np.ndarray,
    converged: bool = True,
) -> SparseSolveResult:
    control = problem.signal(values)
    return SparseSolveResult(
        control=control,
        l1_value=float(l1_value),
        l0_value=l0_norm(control, settings.zero_tol),
        fractional_count=int(fractional_indices(control.values, settings.zero_tol).size),
        method=method,
        iterations=iterations,
        lp_objective=float(lp_objective),
        converged=converged,
        dual=np.asarray(dual, dtype=float),
        residual=problem.residual(control.values),
    )


def _l1_vertex(problem: TranscribedProblem, settings: Settings) -> LpSolution:
    return _solve_lp(problem, problem.split_program(), settings)


def solve_l1(problem: TranscribedProblem, settings: Optional[Settings] = None) -> SparseSolveResult:
    """Minimum-L1 control as an LP vertex.

    Raises:
        NotReachableError: ``ξ`` is outside the reachable set at this horizon.
    """
    settings = settings or _DEFAULT_SETTINGS
    solution = _l1_vertex(problem, settings)
    values = problem.unsplit(solution.values)
    result = _result(
        problem,
        values,
        l1_value=solution.objective,
        method=SolveMethod.l1_vertex,
        iterations=solution.iterations,
        settings=settings,
        lp_objective=solution.objective,
        dual=solution.duals,
    )
    logger.info("L1 solve: V1=%.10g fractional=%d", result.l1_value, result.fractional_count)
    return result


def _compact_face(
    problem: TranscribedProblem, vertex: LpSolution, settings: Settings
) -> Optional[LpSolution]:
    """Re-solve over the L1-optimal face, minimising ``Σ ∫t² dt (u⁺ + u⁻)``.

    Variables with nonzero reduced cost are pinned at their current bound;
    by complementary slackness every point satisfying those pins is L1-optimal.
    """
    reduced = vertex.reduced_costs
    pinned = np.abs(reduced) > settings.optimality_tol
    lower = np.zeros(reduced.size)
    upper = np.ones(reduced.size)
    lower[pinned] = vertex.values[pinned]
    upper[pinned] = vertex.values[pinned]
    if not np.any(~pinned):
        return None

    moments = problem.constraint.second_moments()
    scale = float(np.max(moments))
    cost = np.concatenate([moments, moments]) / scale
    face = problem.split_program(cost=cost, lower=lower, upper=upper)
    solution = _engine(settings).solve(face)
    if not solution.is_optimal:
        logger.warning("Face LP ended with status %s; keeping the L1 vertex", solution.status.value)
        return None
    logger.debug("Face LP: %d free variable(s), %d pivot(s)", int(np.count_nonzero(~pinned)), solution.iterations)
    return solution


def solve_max_handsoff(
    problem: TranscribedProblem, settings: Optional[Settings] = None
) -> SparseSolveResult:
    """Maximum hands-off (minimum-L0) control.

    Steps:
        1. L1 vertex.
        2. Most compact member of the L1-optimal face (``tie_break="compact"``).
        3. Polish of the ≤ n fractional samples.
        4. Reweighted refinement when polishing fails; the answer then
           reports its fractional samples instead of rounding them.

    Raises:
        NotReachableError: ``ξ`` is outside the reachable set.
    """
    settings = settings or _DEFAULT_SETTINGS
    vertex = _l1_vertex(problem, settings)
    l1_value = vertex.objective
    iterations = vertex.iterations
    chosen = vertex

    if settings.tie_break == "compact":
        face = _compact_face(problem, vertex, settings)
        if face is not None:
            chosen = face
            iterations += face.iterations

    values = problem.unsplit(chosen.values)
    outcome = polish(
        problem,
        values,
        l1_target=l1_value,
        zero_tol=settings.zero_tol,
        feasibility_tol=settings.feasibility_tol,
    )
    if outcome is not None:
        values = outcome.values

    result = _result(
        problem,
        values,
        l1_value=l1_value,
        method=SolveMethod.l1_vertex,
        iterations=iterations,
        settings=settings,
        lp_objective=chosen.objective,
        dual=vertex.duals,
    )

    if result.fractional_count > 0:
        logger.warning(
            "%d fractional sample(s) could not be polished on this grid; trying reweighted refinement",
            result.fractional_count,
        )
        refined = solve_reweighted_lp(problem, settings=settings)
        refined_l1 = problem.delta * float(np.sum(np.abs(refined.control.values)))
        # only L1-optimal refinements keep the value-equality guarantees
        if refined.l0_value < result.l0_value and refined_l1 <= l1_value + 1e-8:
            refined.l1_value = l1_value
            result = refined

    logger.info(
        "Max hands-off solve: L0=%.10g L1*=%.10g fractional=%d",
        result.l0_value,
        result.l1_value,
        result.fractional_count,
    )
    return result


def solve_reweighted_lp(
    problem: TranscribedProblem,
    p: Optional[float] = None,
    max_iter: Optional[int] = None,
    epsilon: Optional[float] = None,
    settings: Optional[Settings] = None,
) -> SparseSolveResult:
    """Iteratively reweighted L1 surrogate for ``min ‖u‖_p^p``.

    The first pass uses unit weights (the plain L1 vertex); later passes use
    ``w_k = (|u_k| + epsilon)^(p - 1)``. Stops when the support repeats or
    after *max_iter* passes, returning the iterate with the smallest L0 norm.

    Raises:
        ValueError: parameters out of range.
        NotReachableError: ``ξ`` is outside the reachable set.
    """
    settings = settings or _DEFAULT_SETTINGS
    p = settings.p if p is None else p
    max_iter = settings.reweight_max_iter if max_iter is None else max_iter
    epsilon = settings.reweight_epsilon if epsilon is None else epsilon
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")

    weights = np.ones(problem.n_intervals)
    previous_support = None
    best: Optional[Tuple[float, np.ndarray, LpSolution]] = None
    l1_value = float("nan")
    converged = False
    iteration = 0

    for iteration in range(1, max_iter + 1):
        solution = _solve_lp(problem, problem.split_program(weights=weights), settings)
        values = problem.unsplit(solution.values)
        if iteration == 1:
            l1_value = solution.objective
        support = np.abs(values) > settings.zero_tol
        l0 = problem.delta * int(np.count_nonzero(support))
        logger.debug("Reweighting pass %d: L0=%.6g", iteration, l0)
        if best is None or l0 < best[0]:
            best = (l0, values, solution)
        if not np.any(support):
            converged = True
            break
        if previous_support is not None and np.array_equal(support, previous_support):
            converged = True
            break
        previous_support = support
        weights = (np.abs(values) + epsilon) ** (p - 1.0)

    if not converged:
        logger.warning("Reweighting stopped at max_iter=%d without a stable support", max_iter)

    _, values, solution = best
    return _result(
        problem,
        values,
        l1_value=l1_value,
        method=SolveMethod.reweighted_lp,
        iterations=iteration,
        settings=settings,
        lp_objective=solution.objective,
        dual=solution.duals,
        converged=converged,
    )


def value_with_dual(
    problem: TranscribedProblem, settings: Optional[Settings] = None
) -> Tuple[float, np.ndarray]:
    """L1 optimum and the equality duals of its LP (a subgradient of V w.r.t. ``-ξ``)."""
    settings = settings or _DEFAULT_SETTINGS
    solution = _l1_vertex(problem, settings)
    return solution.objective, solution.duals


def value(problem: TranscribedProblem, settings: Optional[Settings] = None) -> float:
    """``V(ξ)``: the L1 optimum, equal to the L0 optimum on the reachable set.

    Raises:
        NotReachableError: ``ξ`` is outside the reachable set.
    """
    return value_with_dual(problem, settings)[0]


def phase_one_feasible(problem: TranscribedProblem, settings: Optional[Settings] = None) -> bool:
    """Phase 1 of the split L1 program; the verdict the value solve would reach."""
    settings = settings or _DEFAULT_SETTINGS
    lp = problem.split_program()
    feasible, residual = _engine(settings).check_feasible(lp.eq_matrix, lp.eq_rhs, lp.lower, lp.upper)
    logger.debug("Reachability of %s: %s (residual %.3e)", problem.xi, feasible, residual)
    return feasible


def is_reachable(
    sys: LtiSystem,
    xi: Sequence[float],
    horizon: float,
    n_intervals: int,
    settings: Optional[Settings] = None,
) -> bool:
    """Phase-1 feasibility of the transcription.

    Runs the same phase 1 as :func:`value`, so the two never disagree.
    """
    return phase_one_feasible(transcribe(sys, xi, horizon, n_intervals), settings)

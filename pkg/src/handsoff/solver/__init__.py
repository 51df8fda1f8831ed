"""Transcription and sparse solvers for the maximum hands-off problem."""

from handsoff.solver.polish import PolishOutcome, fractional_indices, polish, snap
from handsoff.solver.sparse import (
    SolveMethod,
    SparseSolveResult,
    is_reachable,
    phase_one_feasible,
    solve_l1,
    solve_max_handsoff,
    solve_reweighted_lp,
    value,
    value_with_dual,
)
from handsoff.solver.transcription import TranscribedProblem, transcribe

__all__ = [
    "PolishOutcome",
    "SolveMethod",
    "SparseSolveResult",
    "TranscribedProblem",
    "fractional_indices",
    "is_reachable",
    "phase_one_feasible",
    "polish",
    "snap",
    "solve_l1",
    "solve_max_handsoff",
    "solve_reweighted_lp",
    "transcribe",
    "value",
    "value_with_dual",
]

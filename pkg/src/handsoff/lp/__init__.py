"""Dense bounded-variable linear programming."""

from handsoff.lp.models import LinearProgram, LpSolution, LpStatus
from handsoff.lp.simplex import RevisedSimplex, check_feasible, solve

__all__ = [
    "LinearProgram",
    "LpSolution",
    "LpStatus",
    "RevisedSimplex",
    "check_feasible",
    "solve",
]

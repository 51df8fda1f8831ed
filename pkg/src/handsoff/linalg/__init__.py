"""Matrix exponential and the discretized terminal constraint."""

from handsoff.linalg.matexp import ConstraintMatrix, build_constraint_matrix, expm

__all__ = ["ConstraintMatrix", "build_constraint_matrix", "expm"]

"""Analytic reference solutions."""

from handsoff.oracle.double_integrator import (
    DiInstance,
    analytic_control,
    analytic_handsoff,
    in_nonnormal_region,
    moment_constraints,
    non_sparse_l1_control,
    optimal_value,
    propagate,
)

__all__ = [
    "DiInstance",
    "analytic_control",
    "analytic_handsoff",
    "in_nonnormal_region",
    "moment_constraints",
    "non_sparse_l1_control",
    "optimal_value",
    "propagate",
]

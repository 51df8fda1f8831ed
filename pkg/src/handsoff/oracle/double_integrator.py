"""Closed-form ground truth for the double integrator ``x1' = x2, x2' = u``.

In the region where the L1 problem is not normal, every feasible ``u >= 0``
satisfies the two moment conditions

    ∫_0^T u dt = -ξ2            and            ∫_0^T (T - t) u dt = -ξ1 - ξ2 T

so the L1 norm is pinned to ``-ξ2`` and many L1-optimal controls exist. The
sparsest of them is the unit pulse on ``[t1, t2)`` with

    t1 = ξ2/2 - ξ1/ξ2,      t2 = -ξ2/2 - ξ1/ξ2,

while a half-height pulse of twice the width and the same centroid is
L1-optimal too but has twice the L0 norm.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from handsoff.core.signal import ControlSignal
from handsoff.core.system import LtiSystem
from handsoff.errors import GeometryError, InvalidSystemError, RegionError

__all__ = [
    "DiInstance",
    "in_nonnormal_region",
    "analytic_handsoff",
    "analytic_control",
    "moment_constraints",
    "non_sparse_l1_control",
    "propagate",
    "optimal_value",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DiInstance:
    """Initial state ``(xi1, xi2)`` of the double integrator and horizon ``T``."""

    xi1: float
    xi2: float
    horizon: float

    def __post_init__(self) -> None:
        if not self.horizon > 0.0 or not np.isfinite(self.horizon):
            raise InvalidSystemError(f"horizon must be a positive finite number, got {self.horizon}")
        if not (np.isfinite(self.xi1) and np.isfinite(self.xi2)):
            raise InvalidSystemError("initial state must be finite")

    @property
    def xi(self) -> np.ndarray:
        return np.array([self.xi1, self.xi2], dtype=float)

    @staticmethod
    def system() -> LtiSystem:
        return LtiSystem.double_integrator()


def in_nonnormal_region(inst: DiInstance) -> bool:
    """True iff ``ξ2²/2 < ξ1``, ``ξ2 < 0`` and ``-ξ2/2 - ξ1/ξ2 < T``."""
    if not inst.xi2 < 0.0:
        return False
    if not 0.5 * inst.xi2**2 < inst.xi1:
        return False
    return (-inst.xi2 / 2.0 - inst.xi1 / inst.xi2) < inst.horizon


def _require_region(inst: DiInstance) -> None:
    if not in_nonnormal_region(inst):
        raise RegionError(
            f"(xi1, xi2, T) = ({inst.xi1}, {inst.xi2}, {inst.horizon}) is outside the non-normal region"
        )


def analytic_handsoff(inst: DiInstance) -> Tuple[float, float]:
    """Switch times ``(t1, t2)`` of the sparsest control ``u = 1`` on ``[t1, t2)``.

    Raises:
        RegionError: *inst* is outside the non-normal region.
    """
    _require_region(inst)
    t1 = inst.xi2 / 2.0 - inst.xi1 / inst.xi2
    t2 = -inst.xi2 / 2.0 - inst.xi1 / inst.xi2
    return t1, t2


def moment_constraints(inst: DiInstance) -> Tuple[float, float]:
    """``(∫u, ∫∫u) = (-ξ2, -ξ1 - ξ2 T)`` required of every feasible control."""
    return -inst.xi2, -inst.xi1 - inst.xi2 * inst.horizon


def optimal_value(inst: DiInstance) -> float:
    """L0 (= L1) optimum ``-ξ2`` inside the non-normal region."""
    _require_region(inst)
    return -inst.xi2


def _pulse(horizon: float, n_intervals: int, start: float, end: float, height: float) -> ControlSignal:
    """Cell averages of ``height · 1[start, end)``; exact when the edges sit on the grid."""
    delta = horizon / n_intervals
    left = np.arange(n_intervals) * delta
    right = left + delta
    overlap = np.clip(np.minimum(right, end) - np.maximum(left, start), 0.0, None)
    values = height * overlap / delta
    # grid-aligned edges produce exact 0/height samples up to rounding
    values[np.abs(values - height) <= 1e-12] = height
    values[np.abs(values) <= 1e-12] = 0.0
    return ControlSignal(horizon, values)


def analytic_control(inst: DiInstance, n_intervals: int = 500) -> ControlSignal:
    """The sparse pulse sampled on an ``n_intervals`` grid."""
    t1, t2 = analytic_handsoff(inst)
    return _pulse(inst.horizon, n_intervals, t1, t2, 1.0)


def non_sparse_l1_control(inst: DiInstance, n_intervals: int = 500) -> ControlSignal:
    """Half-height pulse of width ``2·(-ξ2)`` centred on the moment centroid.

    Its L1 norm is ``-ξ2`` (optimal) but its L0 norm is ``2·(-ξ2)``.

    Raises:
        RegionError: *inst* is outside the non-normal region.
        GeometryError: the pulse does not fit inside ``[0, T]``.
    """
    _require_region(inst)
    m0, m1 = moment_constraints(inst)
    centroid = inst.horizon - m1 / m0
    width = 2.0 * m0
    start, end = centroid - width / 2.0, centroid + width / 2.0
    if start < -1e-12 or end > inst.horizon + 1e-12:
        raise GeometryError(
            f"pulse [{start:.6g}, {end:.6g}] does not fit in [0, {inst.horizon}]"
        )
    logger.debug("Non-sparse pulse on [%.6g, %.6g] at height %.3g", start, end, m0 / width)
    return _pulse(inst.horizon, n_intervals, max(start, 0.0), min(end, inst.horizon), m0 / width)


def propagate(inst: DiInstance, u: ControlSignal) -> np.ndarray:
    """Terminal state under *u* by exact double integration of each interval."""
    delta = u.delta
    x1, x2 = inst.xi1, inst.xi2
    for v in u.values:
        x1 += x2 * delta + 0.5 * v * delta * delta
        x2 += v * delta
    return np.array([x1, x2])

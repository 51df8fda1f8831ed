"""Costate, switching function and the pointwise minimum principle.

For the hands-off problem the costate obeys ``q' = -Aᵀ q`` so
``q(t) = e^{-Aᵀt} q0`` and the switching function is
``s(t) = Bᵀ q(t)``. The Hamiltonian ``|u|^p + qᵀ(Ax + Bu)`` is minimised
over ``|u| <= 1`` pointwise, giving the dead-zone law::

    s < -1        ->  u = 1
    -1 < s < 1    ->  u = 0
    s > 1         ->  u = -1
    s = ±1        ->  tie between 0 and the bang value
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import FrozenSet, Sequence

import numpy as np

from handsoff.core.signal import ControlSignal
from handsoff.core.system import LtiSystem
from handsoff.errors import InvalidSystemError
from handsoff.linalg.matexp import expm

__all__ = [
    "CostateSpec",
    "switching_function",
    "switching_samples",
    "hamiltonian_lp",
    "pointwise_argmin",
    "synthesize",
    "normality_diagnostic",
    "AMBIGUITY_TOL",
    "BOUNDARY_TOL",
]

logger = logging.getLogger(__name__)

# |s| within this of 1 is resolved to 0 by synthesize
AMBIGUITY_TOL = 1e-9
# ||s| - 1| within this counts toward the pinned-set measure
BOUNDARY_TOL = 1e-6

_SAMPLINGS = ("midpoint", "average")


@dataclass(frozen=True, eq=False)
class CostateSpec:
    q0: np.ndarray
    system: LtiSystem
    n: int = field(init=False)

    def __post_init__(self) -> None:
        q0 = np.array(self.q0, dtype=float).reshape(-1)
        if q0.size != self.system.n:
            raise InvalidSystemError(f"q0 must have length {self.system.n}, got {q0.size}")
        if not np.all(np.isfinite(q0)):
            raise InvalidSystemError("q0 entries must be finite")
        q0.setflags(write=False)
        object.__setattr__(self, "q0", q0)
        object.__setattr__(self, "n", q0.size)

    def costate(self, t: float) -> np.ndarray:
        """``q(t) = e^{-Aᵀt} q0``."""
        return expm(-self.system.a_matrix.T * float(t)) @ self.q0

    def costate_samples(self, times: Sequence[float]) -> np.ndarray:
        """Costates at *times*, one row per time."""
        return np.array([self.costate(t) for t in times]).reshape(len(times), self.n)


def switching_function(spec: CostateSpec, t: float) -> float:
    """``s(t) = Bᵀ e^{-Aᵀt} q0``."""
    return float(spec.system.b_vector @ spec.costate(t))


def switching_samples(
    spec: CostateSpec, horizon: float, n_intervals: int, sampling: str = "midpoint"
) -> np.ndarray:
    """Switching function on the control grid.

    ``"midpoint"`` evaluates ``s`` at ``(k + 1/2)Δ``; ``"average"`` returns the
    interval mean ``(1/Δ) ∫ s dt``. Both use one exponential and the step
    recurrence ``q((k+1)Δ + τ) = e^{-AᵀΔ} q(kΔ + τ)``.
    """
    if sampling not in _SAMPLINGS:
        raise ValueError(f"sampling must be one of {_SAMPLINGS}, got {sampling!r}")
    sys = spec.system
    n = sys.n
    delta = horizon / n_intervals
    step = expm(-sys.a_matrix.T * delta)

    if sampling == "midpoint":
        first = expm(-sys.a_matrix.T * (0.5 * delta)) @ spec.q0
    else:
        # ∫_0^Δ e^{-Aᵀt} dt q0 / Δ from the augmented exponential
        aug = np.zeros((2 * n, 2 * n))
        aug[:n, :n] = -sys.a_matrix.T
        aug[:n, n:] = np.eye(n)
        integral = expm(aug * delta)[:n, n:]
        first = integral @ spec.q0 / delta

    out = np.empty(n_intervals)
    q = first
    for k in range(n_intervals):
        out[k] = sys.b_vector @ q
        q = step @ q
    return out


def hamiltonian_lp(
    x: Sequence[float], q: Sequence[float], u: float, p: float, system: LtiSystem
) -> float:
    """``H(x, q, u) = |u|^p + qᵀ(Ax + Bu)``; ``p = 1`` gives the L1 Hamiltonian."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    x = np.asarray(x, dtype=float)
    q = np.asarray(q, dtype=float)
    drift = system.a_matrix @ x + system.b_vector * u
    return float(abs(u) ** p + q @ drift)


def pointwise_argmin(s: float, p: float = 0.5) -> FrozenSet[int]:
    """Minimisers of ``|u|^p + s u`` over ``u ∈ [-1, 1]`` (exact comparisons)."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    if s < -1.0:
        return frozenset({1})
    if s > 1.0:
        return frozenset({-1})
    if s == -1.0:
        return frozenset({0, 1})
    if s == 1.0:
        return frozenset({-1, 0})
    return frozenset({0})


def synthesize(spec: CostateSpec, horizon: float, n_intervals: int) -> ControlSignal:
    """Dead-zone control from the switching function at interval midpoints.

    Samples with ``|s|`` within ``AMBIGUITY_TOL`` of 1 get 0.
    """
    s = switching_samples(spec, horizon, n_intervals, "midpoint")
    values = np.zeros(n_intervals)
    values[s < -1.0 - AMBIGUITY_TOL] = 1.0
    values[s > 1.0 + AMBIGUITY_TOL] = -1.0
    return ControlSignal(horizon, values)


def normality_diagnostic(
    spec: CostateSpec, horizon: float, n_intervals: int, tol: float = BOUNDARY_TOL
) -> float:
    """Grid measure of ``{t_k : ||s(t_k)| - 1| <= tol}``.

    Stays near zero under refinement for a normal problem; a pinned switching
    function (``|s| ≡ 1`` on an interval) gives a positive measure.
    """
    s = switching_samples(spec, horizon, n_intervals, "midpoint")
    pinned = np.abs(np.abs(s) - 1.0) <= tol
    measure = (horizon / n_intervals) * int(np.count_nonzero(pinned))
    logger.debug("Pinned switching-set measure %.6g on %d intervals", measure, n_intervals)
    return measure

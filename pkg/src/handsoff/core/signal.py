"""Piecewise-constant control signals and their (quasi-)norms.

A :class:`ControlSignal` holds one value per interval ``[kΔ, (k+1)Δ)`` of a
uniform grid over ``[0, T]``. Every norm below is exact for that
representative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Tuple

import numpy as np

from handsoff.errors import InvalidSystemError

__all__ = [
    "ControlSignal",
    "NormReport",
    "DEFAULT_ZERO_TOL",
    "l0_kernel",
    "l0_norm",
    "l1_norm",
    "lp_quasinorm_pow",
    "linf_norm",
]

DEFAULT_ZERO_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ControlSignal:
    horizon: float
    values: np.ndarray
    n_intervals: int = field(init=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float).reshape(-1)
        if not self.horizon > 0.0 or not np.isfinite(self.horizon):
            raise InvalidSystemError(f"horizon must be a positive finite number, got {self.horizon}")
        if values.size == 0:
            raise InvalidSystemError("a control signal needs at least one interval")
        if not np.all(np.isfinite(values)):
            raise InvalidSystemError("control values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "n_intervals", int(values.size))

    @classmethod
    def zeros(cls, horizon: float, n_intervals: int) -> "ControlSignal":
        return cls(horizon, np.zeros(n_intervals))

    @classmethod
    def from_function(
        cls, f: Callable[[np.ndarray], np.ndarray], horizon: float, n_intervals: int
    ) -> "ControlSignal":
        """Sample *f* at interval midpoints."""
        delta = horizon / n_intervals
        mids = (np.arange(n_intervals) + 0.5) * delta
        return cls(horizon, np.asarray(f(mids), dtype=float))

    @property
    def delta(self) -> float:
        return self.horizon / self.n_intervals

    @property
    def times(self) -> np.ndarray:
        """Interval start times ``kΔ``."""
        return np.arange(self.n_intervals) * self.delta

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(self.n_intervals) + 0.5) * self.delta

    def support_intervals(self, zero_tol: float = DEFAULT_ZERO_TOL) -> List[Tuple[float, float]]:
        """Merged ``[start, end)`` runs where ``|u| > zero_tol``."""
        active = np.abs(self.values) > zero_tol
        runs: List[Tuple[float, float]] = []
        k = 0
        while k < self.n_intervals:
            if not active[k]:
                k += 1
                continue
            start = k
            while k < self.n_intervals and active[k]:
                k += 1
            runs.append((start * self.delta, k * self.delta))
        return runs

    def fractional_count(self, tol: float = DEFAULT_ZERO_TOL) -> int:
        """Number of samples farther than *tol* from every value in {-1, 0, 1}."""
        distance = np.abs(np.abs(self.values) - np.round(np.clip(np.abs(self.values), 0.0, 1.0)))
        return int(np.count_nonzero(distance > tol))

    def is_bang_off_bang(self, tol: float = DEFAULT_ZERO_TOL) -> bool:
        return self.fractional_count(tol) == 0

    def norm_report(self, p: float = 0.5, zero_tol: float = DEFAULT_ZERO_TOL) -> "NormReport":
        return NormReport(
            l0=l0_norm(self, zero_tol),
            l1=l1_norm(self),
            lp=lp_quasinorm_pow(self, p),
            p=p,
            linf=linf_norm(self),
        )

    def scaled(self, alpha: float) -> "ControlSignal":
        return ControlSignal(self.horizon, alpha * self.values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ControlSignal):
            return NotImplemented
        return self.horizon == other.horizon and np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash((self.horizon, self.values.tobytes()))


@dataclass(frozen=True)
class NormReport:
    """Norms of one signal; ``lp`` stores ``‖u‖_p^p``, not ``‖u‖_p``."""

    l0: float
    l1: float
    lp: float
    p: float
    linf: float


def l0_kernel(v: float) -> int:
    """1 when *v* is nonzero, else 0 (exact comparison)."""
    return 1 if abs(v) > 0.0 else 0


def l0_norm(u: ControlSignal, zero_tol: float = DEFAULT_ZERO_TOL) -> float:
    """Measure of the support: ``Δ · #{k : |u_k| > zero_tol}``."""
    if zero_tol < 0.0:
        raise ValueError(f"zero_tol must be >= 0, got {zero_tol}")
    return u.delta * int(np.count_nonzero(np.abs(u.values) > zero_tol))


def l1_norm(u: ControlSignal) -> float:
    return u.delta * float(np.sum(np.abs(u.values)))


def lp_quasinorm_pow(u: ControlSignal, p: float) -> float:
    """``‖u‖_p^p = Δ Σ |u_k|^p`` for ``0 < p <= 1``."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    magnitude = np.abs(u.values)
    # 0**p is 0 for p > 0, no special casing needed
    return u.delta * float(np.sum(magnitude**p))


def linf_norm(u: ControlSignal) -> float:
    return float(np.max(np.abs(u.values)))

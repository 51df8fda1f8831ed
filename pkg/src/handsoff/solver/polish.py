"""Rounding of the few fractional samples left by an LP vertex.

A vertex of the transcribed L1 program has at most ``n`` samples outside
{-1, 0, 1}. Polishing tries to snap them to {-1, 0, 1}: larger rounded sets
first, zero before the nearer bound, and the samples left free are re-fitted
by least squares against the terminal constraint.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from handsoff.solver.transcription import TranscribedProblem

__all__ = ["PolishOutcome", "fractional_indices", "polish", "snap"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PolishOutcome:
    values: np.ndarray
    rounded: int
    remaining: int
    attempts: int

    @property
    def complete(self) -> bool:
        return self.remaining == 0


def fractional_indices(values: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Indices whose value is farther than *tol* from every point of {-1, 0, 1}."""
    magnitude = np.abs(values)
    distance = np.abs(magnitude - np.round(np.clip(magnitude, 0.0, 1.0)))
    return np.flatnonzero(distance > tol)


def snap(values: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Copy of *values* with samples within *tol* of {-1, 0, 1} set exactly."""
    out = np.array(values, dtype=float)
    nearest = np.round(np.clip(out, -1.0, 1.0))
    close = np.abs(out - nearest) <= tol
    out[close] = nearest[close]
    return out


def _roundings(values: np.ndarray, subset: Sequence[int]) -> Iterator[Tuple[float, ...]]:
    choices = [(0.0, float(np.sign(values[k]))) for k in subset]
    return itertools.product(*choices)


def polish(
    problem: TranscribedProblem,
    values: np.ndarray,
    l1_target: float,
    zero_tol: float = 1e-9,
    feasibility_tol: float = 1e-8,
    l1_slack: float = 1e-8,
) -> Optional[PolishOutcome]:
    """Snap fractional samples of *values* to {-1, 0, 1}.

    Args:
        problem: Transcription the samples must satisfy.
        values: Control samples, typically an LP vertex.
        l1_target: L1 value the polished control may not exceed (plus *l1_slack*).
        zero_tol: Distance from {-1, 0, 1} below which a sample counts as integral.
        feasibility_tol: Scaled bound on ``‖G u + ξ‖∞``.

    Returns:
        The first accepted outcome, rounding as many samples as possible, or
        ``None`` when no rounding keeps the control feasible and L1-optimal.
    """
    values = snap(values, zero_tol)
    frac = fractional_indices(values, zero_tol)
    if frac.size == 0:
        return PolishOutcome(values=values, rounded=0, remaining=0, attempts=0)

    g = problem.g
    limit = problem.residual_tolerance(feasibility_tol)
    delta = problem.delta
    base = values.copy()
    base[frac] = 0.0
    base_rhs = problem.rhs - g @ base

    attempts = 0
    for size in range(frac.size, 0, -1):
        for subset in itertools.combinations(frac.tolist(), size):
            free = [k for k in frac.tolist() if k not in subset]
            for rounding in _roundings(values, subset):
                attempts += 1
                candidate = base.copy()
                candidate[list(subset)] = rounding
                if free:
                    rhs = base_rhs - g[:, list(subset)] @ np.asarray(rounding)
                    fitted, *_ = np.linalg.lstsq(g[:, free], rhs, rcond=None)
                    if np.any(np.abs(fitted) > 1.0 + 1e-12):
                        continue
                    candidate[free] = np.clip(fitted, -1.0, 1.0)
                if problem.residual(candidate) > limit:
                    continue
                if delta * float(np.sum(np.abs(candidate))) > l1_target + l1_slack:
                    continue
                remaining = int(fractional_indices(candidate, zero_tol).size)
                if remaining >= frac.size:
                    continue
                logger.debug(
                    "Polish accepted after %d attempt(s): rounded %d, %d fractional left",
                    attempts,
                    size,
                    remaining,
                )
                return PolishOutcome(values=candidate, rounded=size, remaining=remaining, attempts=attempts)

    logger.debug("No polish found for %d fractional sample(s) after %d attempts", frac.size, attempts)
    return None

"""Direct-solve probes of convexity and continuity of ``V``.

Both probes re-solve the L1 program at every point they look at instead of
interpolating a sampled field.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from handsoff.config import Settings
from handsoff.core.system import LtiSystem
from handsoff.errors import NotReachableError
from handsoff.linalg.matexp import build_constraint_matrix
from handsoff.solver.sparse import value_with_dual
from handsoff.solver.transcription import TranscribedProblem
from handsoff.value_map.field import ValueField

__all__ = [
    "ValueOracle",
    "ConvexityReport",
    "ContinuityRow",
    "ContinuityReport",
    "convexity_probe",
    "continuity_probe",
]

logger = logging.getLogger(__name__)

Box = Sequence[Tuple[float, float]]


class ValueOracle:
    """``V`` and its LP dual for one (system, T, N), sharing the constraint matrix."""

    def __init__(
        self,
        system: LtiSystem,
        horizon: float,
        n_intervals: int,
        settings: Optional[Settings] = None,
    ) -> None:
        self.system = system
        self.horizon = float(horizon)
        self.n_intervals = int(n_intervals)
        self.settings = settings
        self._constraint = build_constraint_matrix(system, horizon, n_intervals)

    @classmethod
    def from_field(cls, value_field: ValueField, settings: Optional[Settings] = None) -> "ValueOracle":
        return cls(value_field.system, value_field.horizon, value_field.n_intervals, settings)

    def problem(self, xi: Sequence[float]) -> TranscribedProblem:
        return TranscribedProblem(
            self.system, np.asarray(xi, dtype=float), self.horizon, self.n_intervals, self._constraint
        )

    def value_with_dual(self, xi: Sequence[float]) -> Tuple[Optional[float], Optional[np.ndarray]]:
        try:
            return value_with_dual(self.problem(xi), self.settings)
        except NotReachableError:
            return None, None

    def value(self, xi: Sequence[float]) -> Optional[float]:
        return self.value_with_dual(xi)[0]


def _as_oracle(source: Union[ValueField, ValueOracle]) -> ValueOracle:
    if isinstance(source, ValueOracle):
        return source
    return ValueOracle.from_field(source)


# ----------------------------------------------------------------------
# Convexity
# ----------------------------------------------------------------------


@dataclass
class ConvexityReport:
    max_violation: float
    trials: int
    worst: Optional[Tuple[Tuple[float, ...], Tuple[float, ...], float]] = None
    rejected: int = 0


def convexity_probe(
    source: Union[ValueField, ValueOracle],
    trials: int = 200,
    seed: int = 42,
    box: Optional[Box] = None,
    pairs: Optional[Sequence[Tuple[Sequence[float], Sequence[float], float]]] = None,
) -> ConvexityReport:
    """Largest ``V((1-λ)ξ + λη) - [(1-λ)V(ξ) + λV(η)]`` over random reachable pairs.

    Args:
        source: A sampled field (its axes give the sampling box) or an oracle.
        trials: Number of pairs.
        seed: Seed for ``numpy.random.default_rng``.
        box: Per-axis ``(lo, hi)``; defaults to the field extent or ``[-3, 3]``.
        pairs: Explicit ``(ξ, η, λ)`` triples, used instead of random draws.
    """
    if trials < 1 and pairs is None:
        raise ValueError(f"trials must be >= 1, got {trials}")
    oracle = _as_oracle(source)
    n = oracle.system.n
    if box is None:
        if isinstance(source, ValueField):
            box = [(axis.lo, axis.hi) for axis in source.axes]
        else:
            box = [(-3.0, 3.0)] * n
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    rng = np.random.default_rng(seed)
    report = ConvexityReport(max_violation=-np.inf, trials=0)

    def _draw() -> Tuple[np.ndarray, float]:
        for _ in range(1000):
            xi = lo + (hi - lo) * rng.random(n)
            v = oracle.value(xi)
            if v is not None:
                return xi, v
            report.rejected += 1
        raise ValueError(f"no reachable state found in box {box}")

    explicit = list(pairs) if pairs is not None else None
    count = len(explicit) if explicit is not None else trials

    for k in range(count):
        if explicit is not None:
            xi_raw, eta_raw, lam = explicit[k]
            xi, eta = np.asarray(xi_raw, dtype=float), np.asarray(eta_raw, dtype=float)
            v_xi, v_eta = oracle.value(xi), oracle.value(eta)
            if v_xi is None or v_eta is None:
                report.rejected += 1
                continue
        else:
            xi, v_xi = _draw()
            eta, v_eta = _draw()
            lam = float(rng.random())
        mid = (1.0 - lam) * xi + lam * eta
        v_mid = oracle.value(mid)
        if v_mid is None:
            logger.warning("Convex combination %s left the reachable set", mid)
            violation = np.inf
        else:
            violation = v_mid - ((1.0 - lam) * v_xi + lam * v_eta)
        report.trials += 1
        if violation > report.max_violation:
            report.max_violation = float(violation)
            report.worst = (tuple(map(float, xi)), tuple(map(float, eta)), float(lam))

    logger.info(
        "Convexity probe: %d trial(s), max violation %.3e, %d rejected draw(s)",
        report.trials,
        report.max_violation,
        report.rejected,
    )
    return report


# ----------------------------------------------------------------------
# Continuity
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ContinuityRow:
    state: Tuple[float, ...]
    value: float
    oscillation: float
    lipschitz: float


@dataclass
class ContinuityReport:
    """``oscillation`` is the largest ``|V(ξ+δ) - V(ξ)|``; ``lipschitz`` the
    largest dual norm seen, which bounds ``oscillation / radius``."""

    radius: float
    oscillation: float = 0.0
    lipschitz: float = 0.0
    rows: List[ContinuityRow] = field(default_factory=list)
    skipped: List[Tuple[float, ...]] = field(default_factory=list)


def _directions(n: int) -> np.ndarray:
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        angles = np.arange(8) * (np.pi / 4.0)
        return np.column_stack([np.cos(angles), np.sin(angles)])
    # coordinate directions only
    eye = np.eye(n)
    return np.vstack([eye, -eye])


def continuity_probe(
    source: Union[ValueField, ValueOracle],
    points: Sequence[Sequence[float]],
    radius: float,
) -> ContinuityReport:
    """Oscillation of ``V`` on rings of *radius* around *points*.

    In 2-D each ring has 8 neighbours, in 1-D two. Points whose value or any
    neighbour is unreachable are skipped and listed in ``skipped``.
    """
    if radius < 0.0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    oracle = _as_oracle(source)
    report = ContinuityReport(radius=float(radius))
    offsets = radius * _directions(oracle.system.n)

    for point in points:
        xi = np.asarray(point, dtype=float)
        centre, dual = oracle.value_with_dual(xi)
        if centre is None:
            report.skipped.append(tuple(map(float, xi)))
            continue
        oscillation = 0.0
        lipschitz = float(np.linalg.norm(dual))
        usable = True
        for offset in offsets:
            v, y = oracle.value_with_dual(xi + offset)
            if v is None:
                usable = False
                break
            oscillation = max(oscillation, abs(v - centre))
            lipschitz = max(lipschitz, float(np.linalg.norm(y)))
        if not usable:
            logger.warning("Skipping %s: a neighbour at radius %g is not reachable", xi, radius)
            report.skipped.append(tuple(map(float, xi)))
            continue
        report.rows.append(ContinuityRow(tuple(map(float, xi)), float(centre), oscillation, lipschitz))
        report.oscillation = max(report.oscillation, oscillation)
        report.lipschitz = max(report.lipschitz, lipschitz)

    return report

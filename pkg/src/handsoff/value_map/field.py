"""Sampling of the value function ``V(ξ)`` over 1-D and 2-D state grids.

One LP per grid point; points are solved in parallel when ``workers > 1``
and always assembled in row-major index order, so the field does not depend
on the schedule. Unreachable points hold ``NaN`` in ``values`` and are read
back as ``None``.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from handsoff.config import Settings
from handsoff.core.system import LtiSystem
from handsoff.errors import InvalidSystemError, NotReachableError, UncontrollableSystemError
from handsoff.linalg.matexp import ConstraintMatrix, build_constraint_matrix
from handsoff.solver.sparse import phase_one_feasible, value_with_dual
from handsoff.solver.transcription import TranscribedProblem

__all__ = [
    "GridAxis",
    "ValueField",
    "BoundaryCell",
    "parse_grid_spec",
    "sample_value_field",
    "boundary_estimate",
    "sublevel_mask",
    "sublevel_convexity_violations",
    "reachability_mismatches",
]

logger = logging.getLogger(__name__)

Index = Tuple[int, ...]


@dataclass(frozen=True)
class GridAxis:
    lo: float
    hi: float
    count: int

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError(f"axis count must be >= 1, got {self.count}")
        if self.count > 1 and not self.hi > self.lo:
            raise ValueError(f"axis needs lo < hi, got {self.lo}:{self.hi}")

    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.count - 1) if self.count > 1 else 0.0


def parse_grid_spec(text: str) -> Tuple[GridAxis, ...]:
    """Parse ``"lo:hi:count[,lo:hi:count]"``.

    Raises:
        ValueError: malformed axis.
    """
    axes = []
    for part in text.split(","):
        fields = part.strip().split(":")
        if len(fields) != 3:
            raise ValueError(f"axis {part!r} is not lo:hi:count")
        try:
            lo, hi, count = float(fields[0]), float(fields[1]), int(fields[2])
        except ValueError:
            raise ValueError(f"axis {part!r} is not lo:hi:count") from None
        axes.append(GridAxis(lo, hi, count))
    return tuple(axes)


@dataclass(eq=False)
class ValueField:
    """Value samples on a product grid.

    Attributes:
        system: Plant the field was sampled for.
        axes: One :class:`GridAxis` per state coordinate.
        values: ``V`` per grid point, row-major over ``axes``; ``NaN`` marks
            an unreachable point.
        duals: LP equality duals per point (trailing axis of length ``n``).
        phase_one: Phase-1 verdict per point when requested, else ``None``.
    """

    system: LtiSystem
    axes: Tuple[GridAxis, ...]
    values: np.ndarray
    horizon: float
    n_intervals: int
    duals: np.ndarray
    phase_one: Optional[np.ndarray] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(axis.count for axis in self.axes)

    @property
    def reachable(self) -> np.ndarray:
        return ~np.isnan(self.values)

    @property
    def delta(self) -> float:
        return self.horizon / self.n_intervals

    def state(self, index: Index) -> np.ndarray:
        return np.array([axis.points()[i] for axis, i in zip(self.axes, index)])

    def value_at(self, index: Index) -> Optional[float]:
        v = self.values[index]
        return None if np.isnan(v) else float(v)

    def rows(self) -> Iterator[Tuple[Tuple[float, ...], Optional[float]]]:
        """``(state, value)`` in row-major order; ``None`` when unreachable."""
        grids = [axis.points() for axis in self.axes]
        for index in np.ndindex(*self.shape):
            state = tuple(float(grids[d][i]) for d, i in enumerate(index))
            yield state, self.value_at(index)


def _check_dimension(sys: LtiSystem, axes: Sequence[GridAxis]) -> None:
    if sys.n not in (1, 2):
        raise InvalidSystemError(f"value maps support n = 1 or 2, got n = {sys.n}")
    if len(axes) != sys.n:
        raise InvalidSystemError(f"grid has {len(axes)} axes for an n = {sys.n} system")


def sample_value_field(
    sys: LtiSystem,
    grid_spec: Sequence[GridAxis],
    horizon: float,
    n_intervals: int,
    workers: int = 1,
    settings: Optional[Settings] = None,
    check_reachability: bool = False,
) -> ValueField:
    """Solve the L1 program at every grid point.

    Args:
        sys: Plant with ``n`` equal to the number of axes (1 or 2).
        grid_spec: Axes of the grid.
        workers: Thread count; the result is identical for any value.
        check_reachability: Also record the phase-1 verdict per point.

    Raises:
        InvalidSystemError: unsupported dimension.
    """
    axes = tuple(grid_spec)
    _check_dimension(sys, axes)
    constraint: ConstraintMatrix = build_constraint_matrix(sys, horizon, n_intervals)
    shape = tuple(axis.count for axis in axes)
    grids = [axis.points() for axis in axes]

    values = np.full(shape, np.nan)
    duals = np.full(shape + (sys.n,), np.nan)
    phase_one = np.zeros(shape, dtype=bool) if check_reachability else None

    def _solve_point(index: Index) -> Tuple[Index, Optional[float], Optional[np.ndarray], bool]:
        xi = np.array([grids[d][i] for d, i in enumerate(index)])
        problem = TranscribedProblem(sys, xi, float(horizon), int(n_intervals), constraint)
        feasible = phase_one_feasible(problem, settings) if check_reachability else False
        try:
            v, y = value_with_dual(problem, settings)
        except NotReachableError:
            return index, None, None, feasible
        return index, v, y, feasible

    indices = list(np.ndindex(*shape))
    logger.info("Sampling %d grid point(s) with %d worker(s)", len(indices), workers)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        futures = [executor.submit(_solve_point, index) for index in indices]
        for future in as_completed(futures):
            index, v, y, feasible = future.result()
            if v is not None:
                values[index] = v
                duals[index] = y
            if phase_one is not None:
                phase_one[index] = feasible

    reached = int(np.count_nonzero(~np.isnan(values)))
    logger.info("Value field done: %d of %d point(s) reachable", reached, len(indices))
    return ValueField(
        system=sys,
        axes=axes,
        values=values,
        horizon=float(horizon),
        n_intervals=int(n_intervals),
        duals=duals,
        phase_one=phase_one,
    )


@dataclass(frozen=True)
class BoundaryCell:
    """Adjacent grid points with one inside ``{V < T - ε}`` and one outside."""

    inner: Index
    outer: Index
    inner_state: Tuple[float, ...]
    outer_state: Tuple[float, ...]
    inner_value: float
    outer_value: Optional[float]


def _neighbour_pairs(shape: Tuple[int, ...]) -> Iterator[Tuple[Index, Index]]:
    for index in np.ndindex(*shape):
        for axis in range(len(shape)):
            if index[axis] + 1 < shape[axis]:
                other = list(index)
                other[axis] += 1
                yield index, tuple(other)


def boundary_estimate(field: ValueField, epsilon: Optional[float] = None) -> List[BoundaryCell]:
    """Grid edges straddling the level set ``V = T``, the reachable-set boundary.

    A point is inside when reachable with ``V < T - ε`` (default ``ε = 2Δ``);
    an edge is reported when exactly one endpoint is inside.

    Raises:
        UncontrollableSystemError: ``(A, B)`` is not controllable, so the
            level-set characterisation does not apply.
    """
    if not field.system.is_controllable():
        raise UncontrollableSystemError(
            "boundary estimation needs a controllable pair (A, B): "
            "rank [B, AB, ..., A^(n-1)B] < n"
        )
    eps = 2.0 * field.delta if epsilon is None else epsilon
    threshold = field.horizon - eps
    inside = field.reachable & (np.nan_to_num(field.values, nan=np.inf) < threshold)

    cells: List[BoundaryCell] = []
    for a, b in _neighbour_pairs(field.shape):
        if inside[a] == inside[b]:
            continue
        inner, outer = (a, b) if inside[a] else (b, a)
        cells.append(
            BoundaryCell(
                inner=inner,
                outer=outer,
                inner_state=tuple(field.state(inner)),
                outer_state=tuple(field.state(outer)),
                inner_value=float(field.values[inner]),
                outer_value=field.value_at(outer),
            )
        )
    logger.debug("Boundary estimate: %d cell(s) at threshold %.6g", len(cells), threshold)
    return cells


def sublevel_mask(field: ValueField, alpha: float) -> np.ndarray:
    """Grid points of ``{ξ ∈ R : V(ξ) <= alpha}``."""
    return field.reachable & (np.nan_to_num(field.values, nan=np.inf) <= alpha)


def sublevel_convexity_violations(
    field: ValueField, alpha: float, tol: float = 1e-8
) -> List[Tuple[Index, Index, Index]]:
    """Pairs in the ``alpha``-sublevel mask whose grid midpoint is outside it.

    Only pairs whose midpoint falls exactly on a grid point are checked. The
    midpoint test allows ``V <= alpha + tol``.
    """
    mask = sublevel_mask(field, alpha)
    relaxed = sublevel_mask(field, alpha + tol)
    members = np.argwhere(mask)
    violations: List[Tuple[Index, Index, Index]] = []
    for i in range(len(members) - 1):
        others = members[i + 1 :]
        total = others + members[i]
        even = np.all(total % 2 == 0, axis=1)
        mids = total[even] // 2
        inside = relaxed[tuple(mids.T)]
        for j, mid in zip(np.flatnonzero(even)[~inside], mids[~inside]):
            violations.append(
                (
                    tuple(int(v) for v in members[i]),
                    tuple(int(v) for v in others[j]),
                    tuple(int(v) for v in mid),
                )
            )
    return violations


def reachability_mismatches(field: ValueField, tol: float = 1e-6) -> List[Index]:
    """Points where phase 1 and ``V <= T + tol`` disagree (expected: none).

    Raises:
        ValueError: the field was sampled without ``check_reachability``.
    """
    if field.phase_one is None:
        raise ValueError("field was sampled without check_reachability=True")
    by_value = field.reachable & (np.nan_to_num(field.values, nan=np.inf) <= field.horizon + tol)
    return [tuple(int(v) for v in idx) for idx in np.argwhere(by_value != field.phase_one)]

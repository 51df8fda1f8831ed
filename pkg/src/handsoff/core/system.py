"""Single-input linear time-invariant plant ``x' = A x + B u``."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from handsoff.errors import InvalidSystemError

__all__ = ["LtiSystem"]


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class LtiSystem:
    """Plant with state matrix ``a_matrix`` (n×n) and input column ``b_vector`` (n).

    Instances are immutable: the arrays are copied and marked read-only.
    """

    a_matrix: np.ndarray
    b_vector: np.ndarray
    label: Optional[str] = None
    n: int = field(init=False)

    def __post_init__(self) -> None:
        a = np.atleast_2d(np.asarray(self.a_matrix, dtype=float))
        b = np.asarray(self.b_vector, dtype=float)
        if b.ndim == 2:
            if b.shape[1] != 1:
                raise InvalidSystemError(
                    f"b_vector must be a single column, got shape {b.shape}"
                )
            b = b[:, 0]
        if b.ndim != 1 or b.size == 0:
            raise InvalidSystemError(f"b_vector must be a 1-D vector, got shape {b.shape}")
        n = b.size
        if a.shape != (n, n):
            raise InvalidSystemError(f"a_matrix must be {n}x{n} to match b_vector, got {a.shape}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise InvalidSystemError("a_matrix and b_vector entries must be finite")
        object.__setattr__(self, "a_matrix", _frozen(a))
        object.__setattr__(self, "b_vector", _frozen(b))
        object.__setattr__(self, "n", n)

    # ------------------------------------------------------------------
    # Factories
    # ------------------------------------------------------------------

    @classmethod
    def double_integrator(cls) -> "LtiSystem":
        return cls([[0.0, 1.0], [0.0, 0.0]], [0.0, 1.0], label="double-integrator")

    @classmethod
    def integrator(cls) -> "LtiSystem":
        return cls([[0.0]], [1.0], label="integrator")

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------

    def controllability_matrix(self) -> np.ndarray:
        """Return ``[B, AB, ..., A^{n-1}B]``."""
        cols = [self.b_vector]
        for _ in range(self.n - 1):
            cols.append(self.a_matrix @ cols[-1])
        return np.column_stack(cols)

    def is_controllable(self) -> bool:
        return int(np.linalg.matrix_rank(self.controllability_matrix())) == self.n

    def check_state(self, xi: Sequence[float]) -> np.ndarray:
        """Validate an initial state and return it as a float array."""
        state = np.asarray(xi, dtype=float).reshape(-1)
        if state.size != self.n:
            raise InvalidSystemError(f"state must have length {self.n}, got {state.size}")
        if not np.all(np.isfinite(state)):
            raise InvalidSystemError("state entries must be finite")
        return state

    def simulate(self, u, xi: Sequence[float]) -> np.ndarray:
        """Terminal state after applying piecewise-constant *u* from *xi*.

        Uses the exact zero-order-hold discretization of each interval.
        """
        from handsoff.linalg.matexp import expm

        state = self.check_state(xi)
        delta = u.delta
        aug = np.zeros((self.n + 1, self.n + 1))
        aug[: self.n, : self.n] = self.a_matrix
        aug[: self.n, self.n] = self.b_vector
        phi = expm(aug * delta)
        transition = phi[: self.n, : self.n]
        gamma = phi[: self.n, self.n]
        for value in u.values:
            state = transition @ state + gamma * value
        return state

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "A": self.a_matrix.tolist(),
            "B": self.b_vector.tolist(),
            "label": self.label,
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LtiSystem):
            return NotImplemented
        return (
            self.label == other.label
            and np.array_equal(self.a_matrix, other.a_matrix)
            and np.array_equal(self.b_vector, other.b_vector)
        )

    def __hash__(self) -> int:
        return hash((self.label, self.a_matrix.tobytes(), self.b_vector.tobytes()))

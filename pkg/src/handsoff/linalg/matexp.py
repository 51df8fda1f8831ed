"""Matrix exponential and exact quadrature of the terminal constraint.

``expm`` is the scaling-and-squaring Padé method: the lowest Padé order whose
1-norm threshold admits the matrix is used; above the largest threshold the
matrix is scaled by ``2**-s`` and the degree-13 approximant squared ``s``
times.

``build_constraint_matrix`` produces the columns
``g_k = ∫_{kΔ}^{(k+1)Δ} e^{-At} B dt`` of the equality ``G u = -ξ``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, Tuple

import numpy as np

from handsoff.errors import InvalidSystemError, MatrixExponentialError

if TYPE_CHECKING:
    from handsoff.core.system import LtiSystem

__all__ = ["ConstraintMatrix", "expm", "build_constraint_matrix", "MAX_SQUARINGS"]

logger = logging.getLogger(__name__)

MAX_SQUARINGS = 60

# Padé coefficients b_0..b_13 of the [13/13] approximant.
_B = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)

# Lower-order coefficient sets.
_LOW_ORDER_COEFFS: Dict[int, Tuple[float, ...]] = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (
        17643225600.0,
        8821612800.0,
        2075673600.0,
        302702400.0,
        30270240.0,
        2162160.0,
        110880.0,
        3960.0,
        90.0,
        1.0,
    ),
}

# 1-norm bounds under which order m reaches unit roundoff.
_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}


def _pade_low(a: np.ndarray, ident: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray]:
    b = _LOW_ORDER_COEFFS[order]
    a2 = a @ a
    power = ident
    u_sum = np.zeros_like(a)
    v_sum = b[0] * ident
    for k in range(1, order // 2 + 1):
        power = power @ a2
        v_sum = v_sum + b[2 * k] * power
        u_sum = u_sum + b[2 * k + 1] * power
    u_sum = u_sum + b[1] * ident
    return a @ u_sum, v_sum


def _pade13(a: np.ndarray, ident: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    b = _B
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a2 @ a4
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
    v = a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident
    return u, v


def expm(m: np.ndarray) -> np.ndarray:
    """Return ``e^m`` for a square real matrix.

    Raises:
        MatrixExponentialError: *m* is not square or has non-finite entries.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise MatrixExponentialError(f"expm needs a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise MatrixExponentialError("expm input contains non-finite entries")

    size = a.shape[0]
    ident = np.eye(size)
    if size == 0:
        return ident
    norm1 = float(np.max(np.sum(np.abs(a), axis=0)))

    for order in (3, 5, 7, 9):
        if norm1 <= _THETA[order]:
            u, v = _pade_low(a, ident, order)
            return np.linalg.solve(v - u, v + u)

    squarings = 0
    if norm1 > _THETA[13]:
        squarings = int(np.ceil(np.log2(norm1 / _THETA[13])))
        if squarings > MAX_SQUARINGS:
            raise MatrixExponentialError(
                f"expm needs {squarings} squarings (limit {MAX_SQUARINGS}); 1-norm {norm1:.3e}"
            )
        a = a / 2.0**squarings
    u, v = _pade13(a, ident)
    result = np.linalg.solve(v - u, v + u)
    for _ in range(squarings):
        result = result @ result
    return result


@dataclass(frozen=True, eq=False)
class ConstraintMatrix:
    """Columns ``g[:, k] = ∫_{kΔ}^{(k+1)Δ} e^{-At} B dt`` and the step map ``e^{-AΔ}``."""

    g: np.ndarray
    transition: np.ndarray
    horizon: float
    n_intervals: int

    @property
    def delta(self) -> float:
        return self.horizon / self.n_intervals

    @property
    def n(self) -> int:
        return int(self.g.shape[0])

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Return ``G u``, i.e. ``∫ e^{-At} B u(t) dt`` for piecewise-constant *u*."""
        return self.g @ np.asarray(values, dtype=float)

    def second_moments(self) -> np.ndarray:
        """``∫_{kΔ}^{(k+1)Δ} t² dt`` for every interval."""
        edges = np.arange(self.n_intervals + 1) * self.delta
        cubes = edges**3 / 3.0
        return np.diff(cubes)


def build_constraint_matrix(sys: "LtiSystem", horizon: float, n_intervals: int) -> ConstraintMatrix:
    """Exact column quadrature through one augmented exponential.

    ``expm([[-A, B], [0, 0]] Δ)`` holds ``e^{-AΔ}`` in its leading block and
    ``g_0`` in its last column; later columns follow ``g_{k+1} = e^{-AΔ} g_k``.
    """
    if not horizon > 0.0:
        raise InvalidSystemError(f"horizon must be > 0, got {horizon}")
    if int(n_intervals) != n_intervals or n_intervals < 1:
        raise InvalidSystemError(f"n_intervals must be a positive integer, got {n_intervals}")
    n_intervals = int(n_intervals)
    n = sys.n
    delta = horizon / n_intervals

    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = -sys.a_matrix
    aug[:n, n] = sys.b_vector
    phi = expm(aug * delta)
    transition = phi[:n, :n].copy()

    g = np.empty((n, n_intervals))
    g[:, 0] = phi[:n, n]
    for k in range(1, n_intervals):
        g[:, k] = transition @ g[:, k - 1]

    g.setflags(write=False)
    transition.setflags(write=False)
    logger.debug("Built %dx%d constraint matrix (T=%g, delta=%g)", n, n_intervals, horizon, delta)
    return ConstraintMatrix(g=g, transition=transition, horizon=float(horizon), n_intervals=n_intervals)

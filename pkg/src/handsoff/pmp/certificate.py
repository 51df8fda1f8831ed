"""Costate certificates for candidate hands-off controls.

A certificate is an initial costate ``q0`` whose switching function agrees
with the sign pattern of ``u`` on every sample:

====================  ====================================
``u_k = +1``          ``s_k <= -1``
``u_k = -1``          ``s_k >= 1``
``u_k = 0``           ``|s_k| <= 1``
``0 < u_k < 1``       ``s_k = -1``  (singular arc)
``-1 < u_k < 0``      ``s_k = 1``
====================  ====================================

The search maximises a common margin ``μ <= 1`` on the inequalities. That
LP has one row per sample, so it is solved through its dual, which has only
``n + 1`` rows; the dual prices of the dual are ``(q0, μ)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from handsoff.core.signal import ControlSignal
from handsoff.errors import InfeasibleCandidateError
from handsoff.linalg.matexp import expm
from handsoff.lp.models import LinearProgram, LpStatus
from handsoff.lp.simplex import RevisedSimplex
from handsoff.pmp.costate import CostateSpec, hamiltonian_lp, normality_diagnostic, switching_samples
from handsoff.solver.polish import fractional_indices
from handsoff.solver.transcription import TranscribedProblem

__all__ = ["PmpCertificate", "find_certificate", "minimum_principle_gap", "CERTIFICATE_TOL"]

logger = logging.getLogger(__name__)

CERTIFICATE_TOL = 1e-6
_PROBE_VALUES = (-1.0, -0.5, 0.0, 0.5, 1.0)


@dataclass(frozen=True, eq=False)
class PmpCertificate:
    q0: np.ndarray
    max_violation: float
    boundary_measure: float
    margin: float = 0.0
    sampling: str = "midpoint"

    def to_dict(self) -> dict:
        return {
            "q0": [float(v) for v in self.q0],
            "max_violation": self.max_violation,
            "boundary_measure": self.boundary_measure,
            "margin": self.margin,
            "sampling": self.sampling,
        }


def _sample_vectors(problem: TranscribedProblem, sampling: str) -> np.ndarray:
    """Rows ``h_k`` with ``s_k = h_k · q0`` for the chosen sampling."""
    n = problem.n
    rows = np.empty((problem.n_intervals, n))
    for i in range(n):
        unit = np.zeros(n)
        unit[i] = 1.0
        spec = CostateSpec(unit, problem.system)
        rows[:, i] = switching_samples(spec, problem.horizon, problem.n_intervals, sampling)
    return rows


def _classify(values: np.ndarray, zero_tol: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    frac = np.zeros(values.size, dtype=bool)
    frac[fractional_indices(values, zero_tol)] = True
    plus = ~frac & (values > 0.5)
    minus = ~frac & (values < -0.5)
    zero = ~frac & ~plus & ~minus
    return plus, minus, zero, frac


def _violations(s: np.ndarray, values: np.ndarray, zero_tol: float) -> np.ndarray:
    plus, minus, zero, frac = _classify(values, zero_tol)
    out = np.zeros(values.size)
    out[plus] = np.maximum(s[plus] + 1.0, 0.0)
    out[minus] = np.maximum(1.0 - s[minus], 0.0)
    out[zero] = np.maximum(np.abs(s[zero]) - 1.0, 0.0)
    out[frac] = np.abs(s[frac] + np.sign(values[frac]))
    return out


def _dual_program(h: np.ndarray, values: np.ndarray, zero_tol: float) -> LinearProgram:
    """Dual of ``max μ  s.t.  M q + μ <= c,  E q = f,  μ <= 1``.

    Variables ``[λ >= 0 (rows of M), ν free (rows of E), ρ >= 0]``; equality
    rows ``Mᵀλ + Eᵀν = 0`` (one per costate entry) and ``Σλ + ρ = 1``.
    """
    plus, minus, zero, frac = _classify(values, zero_tol)
    ineq_rows: List[np.ndarray] = [h[plus], -h[minus], h[zero], -h[zero]]
    ineq_rhs: List[np.ndarray] = [
        -np.ones(int(plus.sum())),
        -np.ones(int(minus.sum())),
        np.ones(int(zero.sum())),
        np.ones(int(zero.sum())),
    ]
    m_matrix = np.vstack(ineq_rows)
    c = np.concatenate(ineq_rhs)
    e_matrix = h[frac]
    f = -np.sign(values[frac])

    n = h.shape[1]
    k_ineq, k_eq = m_matrix.shape[0], e_matrix.shape[0]
    eq_matrix = np.zeros((n + 1, k_ineq + k_eq + 1))
    eq_matrix[:n, :k_ineq] = m_matrix.T
    eq_matrix[:n, k_ineq : k_ineq + k_eq] = e_matrix.T
    eq_matrix[n, :k_ineq] = 1.0
    eq_matrix[n, -1] = 1.0
    rhs = np.zeros(n + 1)
    rhs[n] = 1.0

    lower = np.concatenate([np.zeros(k_ineq), np.full(k_eq, -np.inf), [0.0]])
    upper = np.full(k_ineq + k_eq + 1, np.inf)
    cost = np.concatenate([c, f, [1.0]])
    return LinearProgram(cost, eq_matrix, rhs, lower, upper)


def find_certificate(
    problem: TranscribedProblem,
    u: ControlSignal,
    tol: float = CERTIFICATE_TOL,
    sampling: str = "midpoint",
    zero_tol: float = 1e-9,
    feasibility_tol: float = 1e-8,
) -> Optional[PmpCertificate]:
    """Search for a costate certifying *u*.

    Args:
        problem: Transcription *u* was computed for.
        u: Candidate control on the same grid.
        tol: Largest accepted sign-condition violation.
        sampling: ``"midpoint"`` or ``"average"`` evaluation of ``s``.

    Returns:
        The certificate, or ``None`` when no costate satisfies the conditions
        within *tol*.

    Raises:
        InfeasibleCandidateError: *u* does not reach the origin or leaves ``[-1, 1]``.
    """
    if u.n_intervals != problem.n_intervals or u.horizon != problem.horizon:
        raise InfeasibleCandidateError(
            f"control grid ({u.horizon}, {u.n_intervals}) does not match the problem "
            f"({problem.horizon}, {problem.n_intervals})"
        )
    residual = problem.residual(u.values)
    if residual > problem.residual_tolerance(feasibility_tol):
        raise InfeasibleCandidateError(f"control misses the origin: terminal residual {residual:.3e}")
    if np.max(np.abs(u.values)) > 1.0 + feasibility_tol:
        raise InfeasibleCandidateError("control exceeds the bound |u| <= 1")

    h = _sample_vectors(problem, sampling)
    program = _dual_program(h, u.values, zero_tol)
    solution = RevisedSimplex().solve(program)
    if solution.status is not LpStatus.optimal:
        logger.info("No costate certificate: dual program is %s", solution.status.value)
        return None

    n = problem.n
    q0 = solution.duals[:n].copy()
    margin = float(solution.duals[n])
    violation = float(np.max(_violations(h @ q0, u.values, zero_tol), initial=0.0))
    logger.debug("Certificate search: margin=%.3e violation=%.3e", margin, violation)
    if violation > tol:
        logger.info("No costate certificate: best violation %.3e exceeds %.1e", violation, tol)
        return None

    spec = CostateSpec(q0, problem.system)
    return PmpCertificate(
        q0=q0,
        max_violation=violation,
        boundary_measure=normality_diagnostic(spec, problem.horizon, problem.n_intervals),
        margin=margin,
        sampling=sampling,
    )


def minimum_principle_gap(
    problem: TranscribedProblem, u: ControlSignal, certificate: PmpCertificate, p: float = 1.0
) -> float:
    """Largest ``H(x_k, q_k, u_k) - min_v H(x_k, q_k, v)`` over the grid midpoints.

    ``v`` ranges over {-1, -0.5, 0, 0.5, 1}; a certified control gives a gap
    no larger than the certificate tolerance.
    """
    sys = problem.system
    spec = CostateSpec(certificate.q0, sys)
    delta = problem.delta
    times = u.midpoints

    def _zoh(step: float) -> Tuple[np.ndarray, np.ndarray]:
        aug = np.zeros((sys.n + 1, sys.n + 1))
        aug[: sys.n, : sys.n] = sys.a_matrix
        aug[: sys.n, sys.n] = sys.b_vector
        phi = expm(aug * step)
        return phi[: sys.n, : sys.n], phi[: sys.n, sys.n]

    full_phi, full_gamma = _zoh(delta)
    half_phi, half_gamma = _zoh(0.5 * delta)
    # state at each midpoint: whole steps then a half step
    x = problem.xi.copy()
    gap = 0.0
    for k, t in enumerate(times):
        value = float(u.values[k])
        x_mid = half_phi @ x + half_gamma * value
        q = spec.costate(t)
        current = hamiltonian_lp(x_mid, q, value, p, sys)
        best = min(hamiltonian_lp(x_mid, q, v, p, sys) for v in _PROBE_VALUES)
        gap = max(gap, current - best)
        x = full_phi @ x + full_gamma * value
    return gap

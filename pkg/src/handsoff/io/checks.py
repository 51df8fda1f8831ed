"""Verification checks for a candidate control, reported like a scan result.

Each check has a severity. Only failed ``blocking`` checks fail the report;
``warning`` and ``info`` entries are printed but never change the verdict.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import List, Optional

import numpy as np
from jinja2 import Environment, FileSystemLoader

from handsoff.config import Settings
from handsoff.core.signal import ControlSignal
from handsoff.errors import InfeasibleCandidateError, NotReachableError
from handsoff.pmp.certificate import PmpCertificate, find_certificate, minimum_principle_gap
from handsoff.solver.sparse import value
from handsoff.solver.transcription import TranscribedProblem

__all__ = [
    "CheckName",
    "Severity",
    "CheckResult",
    "VerifyReport",
    "verify_control",
    "render_report",
]

logger = logging.getLogger(__name__)


class CheckName(Enum):
    feasibility = "feasibility"
    magnitude = "magnitude"
    norms = "norms"
    bang_off_bang = "bang_off_bang"
    l1_optimality = "l1_optimality"
    certificate = "certificate"
    minimum_principle = "minimum_principle"


class Severity(Enum):
    blocking = "blocking"
    warning = "warning"
    info = "info"


@dataclass
class CheckResult:
    name: CheckName
    severity: Severity
    passed: bool
    description: str
    value: Optional[float] = None


@dataclass
class VerifyReport:
    horizon: float
    n_intervals: int
    xi: List[float]
    checks: List[CheckResult] = field(default_factory=list)
    certificate: Optional[PmpCertificate] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.severity is Severity.blocking)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "horizon": self.horizon,
            "n_intervals": self.n_intervals,
            "xi": self.xi,
            "checks": [
                {
                    "name": c.name.value,
                    "severity": c.severity.value,
                    "passed": c.passed,
                    "description": c.description,
                    "value": c.value,
                }
                for c in self.checks
            ],
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
        }


def verify_control(
    problem: TranscribedProblem, u: ControlSignal, settings: Optional[Settings] = None
) -> VerifyReport:
    """Run every check of *u* against *problem*.

    Blocking checks: terminal feasibility, the bound ``|u| <= 1`` and the
    costate certificate. The certificate search is skipped (and fails) when
    the control is infeasible.
    """
    settings = settings or Settings()
    report = VerifyReport(
        horizon=problem.horizon,
        n_intervals=problem.n_intervals,
        xi=[float(v) for v in problem.xi],
    )

    residual = problem.residual(u.values)
    limit = problem.residual_tolerance(settings.feasibility_tol)
    feasible = residual <= limit
    report.checks.append(
        CheckResult(
            CheckName.feasibility,
            Severity.blocking,
            feasible,
            f"terminal residual {residual:.3e} (limit {limit:.1e})",
            residual,
        )
    )

    peak = float(np.max(np.abs(u.values), initial=0.0))
    bounded = peak <= 1.0 + settings.feasibility_tol
    report.checks.append(
        CheckResult(CheckName.magnitude, Severity.blocking, bounded, f"max |u| = {peak:.6g}", peak)
    )

    norms = u.norm_report(settings.p, settings.zero_tol)
    report.checks.append(
        CheckResult(
            CheckName.norms,
            Severity.info,
            True,
            f"L0 {norms.l0:.6g}, L1 {norms.l1:.6g}, Lp^p (p={norms.p:g}) {norms.lp:.6g}",
            norms.l0,
        )
    )

    fractional = u.fractional_count(settings.zero_tol)
    report.checks.append(
        CheckResult(
            CheckName.bang_off_bang,
            Severity.warning,
            fractional == 0,
            f"{fractional} sample(s) outside {{-1, 0, 1}}",
            float(fractional),
        )
    )

    if feasible and bounded:
        try:
            v1 = value(problem, settings)
        except NotReachableError:
            v1 = None
        if v1 is not None:
            gap = norms.l1 - v1
            report.checks.append(
                CheckResult(
                    CheckName.l1_optimality,
                    Severity.warning,
                    gap <= settings.certificate_tol * (1.0 + v1),
                    f"L1 {norms.l1:.9g} vs optimum {v1:.9g}",
                    gap,
                )
            )
        _certificate_checks(report, problem, u, settings)
    else:
        report.checks.append(
            CheckResult(
                CheckName.certificate,
                Severity.blocking,
                False,
                "skipped: control is not feasible",
            )
        )

    logger.info(
        "Verification %s: %d check(s), %d failed",
        "passed" if report.passed else "failed",
        len(report.checks),
        len(report.failures),
    )
    return report


def _certificate_checks(
    report: VerifyReport, problem: TranscribedProblem, u: ControlSignal, settings: Settings
) -> None:
    try:
        certificate = find_certificate(
            problem,
            u,
            tol=settings.certificate_tol,
            zero_tol=settings.zero_tol,
            feasibility_tol=settings.feasibility_tol,
        )
    except InfeasibleCandidateError as exc:
        report.checks.append(CheckResult(CheckName.certificate, Severity.blocking, False, str(exc)))
        return

    if certificate is None:
        report.checks.append(
            CheckResult(
                CheckName.certificate,
                Severity.blocking,
                False,
                "no costate satisfies the switching conditions",
            )
        )
        return

    report.certificate = certificate
    q0 = ", ".join(f"{v:.6g}" for v in certificate.q0)
    report.checks.append(
        CheckResult(
            CheckName.certificate,
            Severity.blocking,
            True,
            f"q0 = ({q0}), violation {certificate.max_violation:.2e}, "
            f"pinned measure {certificate.boundary_measure:.4g}",
            certificate.max_violation,
        )
    )
    gap = minimum_principle_gap(problem, u, certificate)
    report.checks.append(
        CheckResult(
            CheckName.minimum_principle,
            Severity.info,
            gap <= settings.certificate_tol,
            f"largest Hamiltonian gap {gap:.3e}",
            gap,
        )
    )


def render_report(report: VerifyReport) -> str:
    """Plain-text report from ``verify_report.txt.j2``."""
    templates_dir = Path(__file__).parent.parent / "templates"
    env = Environment(loader=FileSystemLoader(str(templates_dir)), trim_blocks=True, lstrip_blocks=True)
    return env.get_template("verify_report.txt.j2").render(report=report)

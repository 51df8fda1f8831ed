"""Minimum-principle tools: costates, dead-zone synthesis and certificates."""

from handsoff.pmp.certificate import (
    CERTIFICATE_TOL,
    PmpCertificate,
    find_certificate,
    minimum_principle_gap,
)
from handsoff.pmp.costate import (
    CostateSpec,
    hamiltonian_lp,
    normality_diagnostic,
    pointwise_argmin,
    switching_function,
    switching_samples,
    synthesize,
)

__all__ = [
    "CERTIFICATE_TOL",
    "CostateSpec",
    "PmpCertificate",
    "find_certificate",
    "hamiltonian_lp",
    "minimum_principle_gap",
    "normality_diagnostic",
    "pointwise_argmin",
    "switching_function",
    "switching_samples",
    "synthesize",
]

"""Domain types: LTI plants, piecewise-constant controls and their norms."""

from handsoff.core.signal import (
    DEFAULT_ZERO_TOL,
    ControlSignal,
    NormReport,
    l0_kernel,
    l0_norm,
    l1_norm,
    linf_norm,
    lp_quasinorm_pow,
)
from handsoff.core.system import LtiSystem

__all__ = [
    "DEFAULT_ZERO_TOL",
    "ControlSignal",
    "LtiSystem",
    "NormReport",
    "l0_kernel",
    "l0_norm",
    "l1_norm",
    "linf_norm",
    "lp_quasinorm_pow",
]

"""Exception hierarchy shared by every handsoff module."""

from typing import Optional, Sequence


class HandsOffError(Exception):
    """Root of all handsoff errors."""


class InvalidSystemError(HandsOffError, ValueError):
    """Raised when an LTI system or signal fails validation."""


class ConfigError(HandsOffError):
    """Raised when a settings or system file cannot be read or is invalid."""


class MatrixExponentialError(HandsOffError):
    """Raised when the matrix exponential receives non-finite input."""


class SimplexError(HandsOffError):
    """Raised on malformed linear programs or when the pivot limit is hit."""


class NotReachableError(HandsOffError):
    """The initial state has no feasible control at the given horizon."""

    def __init__(self, xi: Optional[Sequence[float]] = None, horizon: Optional[float] = None):
        self.xi = None if xi is None else [float(v) for v in xi]
        self.horizon = horizon
        super().__init__(f"initial state not reachable at horizon T={horizon} (xi={self.xi})")


class InfeasibleCandidateError(HandsOffError):
    """A candidate control does not steer the state to the origin."""


class RegionError(HandsOffError, ValueError):
    """A double-integrator instance lies outside the non-normal region."""


class GeometryError(HandsOffError):
    """A constructed control does not fit inside the horizon."""


class UncontrollableSystemError(HandsOffError):
    """The pair (A, B) is not controllable."""

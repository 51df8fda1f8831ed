"""Value-function sampling and direct-solve probes."""

from handsoff.value_map.field import (
    BoundaryCell,
    GridAxis,
    ValueField,
    boundary_estimate,
    parse_grid_spec,
    reachability_mismatches,
    sample_value_field,
    sublevel_convexity_violations,
    sublevel_mask,
)
from handsoff.value_map.probes import (
    ContinuityReport,
    ContinuityRow,
    ConvexityReport,
    ValueOracle,
    continuity_probe,
    convexity_probe,
)

__all__ = [
    "BoundaryCell",
    "ContinuityReport",
    "ContinuityRow",
    "ConvexityReport",
    "GridAxis",
    "ValueField",
    "ValueOracle",
    "boundary_estimate",
    "continuity_probe",
    "convexity_probe",
    "parse_grid_spec",
    "reachability_mismatches",
    "sample_value_field",
    "sublevel_convexity_violations",
    "sublevel_mask",
]

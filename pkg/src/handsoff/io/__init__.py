"""Artifact plumbing: config files, CSV tables, manifests, plots and reports."""

from handsoff.io.checks import (
    CheckName,
    CheckResult,
    Severity,
    VerifyReport,
    render_report,
    verify_control,
)
from handsoff.io.plots import ControlPlotRenderer, PlotSeries, step_points
from handsoff.io.store import (
    RunManifest,
    file_sha256,
    format_float,
    input_hashes,
    load_system,
    read_control_csv,
    read_manifest,
    write_control_csv,
    write_controls_csv,
    write_json,
    write_manifest,
    write_value_csv,
)

__all__ = [
    "CheckName",
    "CheckResult",
    "ControlPlotRenderer",
    "PlotSeries",
    "RunManifest",
    "Severity",
    "VerifyReport",
    "file_sha256",
    "format_float",
    "input_hashes",
    "load_system",
    "read_control_csv",
    "read_manifest",
    "render_report",
    "step_points",
    "verify_control",
    "write_control_csv",
    "write_controls_csv",
    "write_json",
    "write_manifest",
    "write_value_csv",
]

"""File formats: system configs, control/value CSVs and run manifests.

CSV conventions: header row, ``.`` decimal separator, floats written with
``repr`` (shortest round trip) and ``\\n`` line endings, so identical runs
produce byte-identical files. Manifests and reports are JSON, written
atomically through a ``.tmp`` sibling and :func:`os.replace`.
"""

import csv
import dataclasses
import hashlib
import io
import json
import logging
import os
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import yaml

from handsoff import __version__
from handsoff.core.signal import ControlSignal
from handsoff.core.system import LtiSystem
from handsoff.errors import ConfigError, InvalidSystemError
from handsoff.value_map.field import ValueField

__all__ = [
    "RunManifest",
    "load_system",
    "write_control_csv",
    "read_control_csv",
    "write_controls_csv",
    "write_value_csv",
    "write_json",
    "write_manifest",
    "read_manifest",
    "file_sha256",
    "format_float",
    "input_hashes",
]

logger = logging.getLogger(__name__)

_GRID_TOL = 1e-9


def _serialize(obj: Any) -> Any:
    """Recursively convert dataclasses, enums and numpy values to JSON types."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _serialize(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, np.ndarray):
        return [_serialize(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, (list, tuple)):
        return [_serialize(item) for item in obj]
    if isinstance(obj, dict):
        return {str(k): _serialize(v) for k, v in obj.items()}
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = path.with_suffix(path.suffix + ".tmp")
    with open(tmp_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp_path, path)


def format_float(value: float) -> str:
    """``repr`` of the value with ``-0.0`` folded to ``0.0``."""
    return repr(float(value) + 0.0)


# ----------------------------------------------------------------------
# System configs
# ----------------------------------------------------------------------


def _read_document(path: Path) -> Mapping[str, Any]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"Cannot read system file {path}: {exc}") from None
    suffix = path.suffix.lower()
    try:
        if suffix in (".yaml", ".yml"):
            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"{path}: invalid YAML{where}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping with keys n, A, B")
    return data


def load_system(path: Path) -> LtiSystem:
    """Parse a system file (``.json``, ``.yaml`` or ``.yml``).

    Expected keys: ``n`` (int), ``A`` (n×n nested list), ``B`` (length-n
    list) and optionally ``label``.

    Raises:
        ConfigError: unreadable file, missing or malformed field.
    """
    path = Path(path)
    data = _read_document(path)
    for key in ("n", "A", "B"):
        if key not in data:
            raise ConfigError(f"{path}: missing field {key!r}")
    unknown = sorted(set(data) - {"n", "A", "B", "label"})
    if unknown:
        raise ConfigError(f"{path}: unknown field(s) {', '.join(map(repr, unknown))}")

    n = data["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ConfigError(f"{path}: field 'n' must be a positive integer, got {n!r}")
    try:
        a = np.array(data["A"], dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: field 'A' must be a numeric matrix") from None
    try:
        b = np.array(data["B"], dtype=float).reshape(-1)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: field 'B' must be a numeric vector") from None
    if a.shape != (n, n):
        raise ConfigError(f"{path}: field 'A' must be {n}x{n}, got shape {a.shape}")
    if b.size != n:
        raise ConfigError(f"{path}: field 'B' must have {n} entries, got {b.size}")

    label = data.get("label")
    try:
        system = LtiSystem(a, b, label=None if label is None else str(label))
    except InvalidSystemError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    logger.debug("Loaded n=%d system %r from %s", system.n, system.label, path)
    return system


# ----------------------------------------------------------------------
# CSV tables
# ----------------------------------------------------------------------


def _write_rows(path: Path, header: Sequence[str], rows: Sequence[Sequence[str]]) -> Path:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    _atomic_write(Path(path), buffer.getvalue())
    return Path(path)


def write_control_csv(path: Path, u: ControlSignal) -> Path:
    """Write ``t_start,u`` rows, one per grid interval."""
    rows = [(format_float(t), format_float(v)) for t, v in zip(u.times, u.values)]
    return _write_rows(path, ("t_start", "u"), rows)


def write_controls_csv(path: Path, horizon: float, columns: Mapping[str, ControlSignal]) -> Path:
    """Several controls on one grid: ``t_start,<name>,<name>,...``.

    Raises:
        ValueError: the controls do not share the grid.
    """
    signals = list(columns.values())
    if not signals:
        raise ValueError("at least one control is required")
    grid = signals[0].n_intervals
    for name, u in columns.items():
        if u.n_intervals != grid or u.horizon != horizon:
            raise ValueError(f"control {name!r} is not on the ({horizon}, {grid}) grid")
    times = signals[0].times
    rows = [
        [format_float(t)] + [format_float(u.values[k]) for u in signals]
        for k, t in enumerate(times)
    ]
    return _write_rows(path, ["t_start", *columns.keys()], rows)


def read_control_csv(path: Path, horizon: float, column: str = "u") -> ControlSignal:
    """Read one control column back onto the grid of length ``horizon``.

    The ``t_start`` column must list ``kT/N`` for ``k = 0..N-1``.

    Raises:
        ConfigError: unreadable file, missing column, bad number or grid.
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            fieldnames = reader.fieldnames or []
            if "t_start" not in fieldnames or column not in fieldnames:
                raise ConfigError(f"{path}: need columns 't_start' and {column!r}, found {fieldnames}")
            starts: List[float] = []
            values: List[float] = []
            for line, row in enumerate(reader, start=2):
                try:
                    starts.append(float(row["t_start"]))
                    values.append(float(row[column]))
                except (TypeError, ValueError):
                    raise ConfigError(f"{path}: line {line}: not a number") from None
    except OSError as exc:
        raise ConfigError(f"Cannot read control file {path}: {exc}") from None

    if not values:
        raise ConfigError(f"{path}: no samples")
    expected = np.arange(len(values)) * (float(horizon) / len(values))
    if np.max(np.abs(np.array(starts) - expected)) > _GRID_TOL * max(1.0, float(horizon)):
        raise ConfigError(f"{path}: t_start is not a uniform grid over [0, {horizon}]")
    return ControlSignal(float(horizon), np.array(values))


def write_value_csv(path: Path, field: ValueField) -> Path:
    """``xi1[,xi2],value`` rows in row-major grid order; unreachable is empty."""
    header = [f"xi{i + 1}" for i in range(len(field.axes))] + ["value"]
    rows = [
        [format_float(s) for s in state] + ["" if value is None else format_float(value)]
        for state, value in field.rows()
    ]
    return _write_rows(path, header, rows)


# ----------------------------------------------------------------------
# JSON artifacts
# ----------------------------------------------------------------------


@dataclasses.dataclass
class RunManifest:
    """Everything needed to reproduce one CLI invocation.

    No timestamps are recorded: the same invocation yields the same manifest.
    """

    command: str
    parameters: Dict[str, Any]
    settings: Dict[str, Any]
    version: str = __version__
    inputs: Dict[str, str] = dataclasses.field(default_factory=dict)
    outputs: List[str] = dataclasses.field(default_factory=list)


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_json(path: Path, payload: Any) -> Path:
    path = Path(path)
    _atomic_write(path, json.dumps(_serialize(payload), indent=2, sort_keys=True) + "\n")
    return path


def write_manifest(path: Path, manifest: RunManifest) -> Path:
    """Atomically write *manifest* as JSON."""
    logger.debug("Writing manifest for %r to %s", manifest.command, path)
    return write_json(path, manifest)


def read_manifest(path: Path) -> RunManifest:
    """Raises ConfigError on unreadable or malformed files."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"Cannot read manifest {path}: {exc}") from None
    try:
        return RunManifest(
            command=data["command"],
            parameters=data.get("parameters", {}),
            settings=data.get("settings", {}),
            version=data.get("version", ""),
            inputs=data.get("inputs", {}),
            outputs=data.get("outputs", []),
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{path}: malformed manifest ({exc})") from None


def input_hashes(paths: Sequence[Tuple[str, Optional[Path]]]) -> Dict[str, str]:
    """``{name: sha256}`` for the given ``(name, path)`` pairs that exist."""
    return {name: file_sha256(p) for name, p in paths if p is not None and Path(p).exists()}



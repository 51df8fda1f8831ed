"""Numeric settings shared by the solvers and the CLI.

Settings are layered, later layers winning:

1. dataclass defaults below
2. the ``[tool.handsoff]`` table of a TOML file (``--config`` or
   ``./handsoff.toml`` when present)
3. ``HANDSOFF_<FIELD>`` environment variables; a ``.env`` file in the
   working directory is loaded first without overriding the environment
"""

from __future__ import annotations

import dataclasses
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import toml
from dotenv import load_dotenv

from handsoff.errors import ConfigError

__all__ = ["Settings", "load_settings", "DEFAULT_SETTINGS_FILE", "ENV_PREFIX"]

logger = logging.getLogger(__name__)

DEFAULT_SETTINGS_FILE = "handsoff.toml"
ENV_PREFIX = "HANDSOFF_"

_TIE_BREAKS = ("compact", "none")


@dataclass(frozen=True)
class Settings:
    n_intervals: int = 500
    p: float = 0.5
    reweight_epsilon: float = 1e-4
    reweight_max_iter: int = 20
    zero_tol: float = 1e-9
    feasibility_tol: float = 1e-8
    optimality_tol: float = 1e-9
    certificate_tol: float = 1e-6
    refactor_every: int = 50
    degeneracy_threshold: int = 50
    workers: int = 1
    tie_break: str = "compact"

    def __post_init__(self) -> None:
        if self.n_intervals < 1:
            raise ConfigError(f"n_intervals must be >= 1, got {self.n_intervals}")
        if not 0.0 < self.p < 1.0:
            raise ConfigError(f"p must lie in (0, 1), got {self.p}")
        if self.reweight_epsilon <= 0.0:
            raise ConfigError(f"reweight_epsilon must be > 0, got {self.reweight_epsilon}")
        if self.reweight_max_iter < 1:
            raise ConfigError(f"reweight_max_iter must be >= 1, got {self.reweight_max_iter}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.refactor_every < 1:
            raise ConfigError(f"refactor_every must be >= 1, got {self.refactor_every}")
        if self.tie_break not in _TIE_BREAKS:
            raise ConfigError(
                f"tie_break must be one of {', '.join(_TIE_BREAKS)}, got {self.tie_break!r}"
            )
        for name in ("zero_tol", "feasibility_tol", "optimality_tol", "certificate_tol"):
            if getattr(self, name) < 0.0:
                raise ConfigError(f"{name} must be >= 0")

    def as_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    def replace(self, **changes: Any) -> "Settings":
        """Return a copy with *changes* applied; ``None`` values are ignored."""
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})


def _coerce(name: str, raw: Any) -> Any:
    """Convert *raw* to the type of the Settings field *name*."""
    fields = {f.name: f for f in dataclasses.fields(Settings)}
    if name not in fields:
        valid = ", ".join(sorted(fields))
        raise ConfigError(f"Unknown setting {name!r}. Valid settings: {valid}")
    default = fields[name].default
    try:
        if isinstance(default, bool):
            return str(raw).lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return str(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"Setting {name!r}: cannot parse {raw!r} ({exc})") from None


def _read_toml(path: Path) -> Dict[str, Any]:
    try:
        data = toml.load(path)
    except (OSError, toml.TomlDecodeError) as exc:
        raise ConfigError(f"Cannot read settings file {path}: {exc}") from None
    table = data.get("tool", {}).get("handsoff", data.get("handsoff", {}))
    if not isinstance(table, dict):
        raise ConfigError(f"{path}: [tool.handsoff] must be a table")
    return table


def _read_env(environ: Mapping[str, str]) -> Dict[str, str]:
    names = {f.name for f in dataclasses.fields(Settings)}
    found: Dict[str, str] = {}
    for key, value in environ.items():
        if not key.startswith(ENV_PREFIX):
            continue
        name = key[len(ENV_PREFIX):].lower()
        if name in names:
            found[name] = value
    return found


def load_settings(
    path: Optional[Path] = None,
    environ: Optional[Mapping[str, str]] = None,
    use_dotenv: bool = True,
) -> Settings:
    """Build :class:`Settings` from defaults, a TOML file and the environment.

    Args:
        path: Explicit TOML file. When omitted, ``./handsoff.toml`` is used if
            it exists.
        environ: Environment mapping (defaults to ``os.environ``).
        use_dotenv: Load ``./.env`` into ``os.environ`` first.

    Raises:
        ConfigError: unreadable file, unknown key or bad value.
    """
    values: Dict[str, Any] = {}

    if path is None:
        candidate = Path.cwd() / DEFAULT_SETTINGS_FILE
        path = candidate if candidate.exists() else None
    elif not Path(path).exists():
        raise ConfigError(f"Settings file not found: {path}")

    if path is not None:
        for key, raw in _read_toml(Path(path)).items():
            values[key] = _coerce(key, raw)
        logger.debug("Loaded %d setting(s) from %s", len(values), path)

    if environ is None:
        if use_dotenv:
            load_dotenv(Path.cwd() / ".env", override=False)
        environ = os.environ
    for key, raw in _read_env(environ).items():
        values[key] = _coerce(key, raw)

    return Settings(**values)

"""Shared fixtures."""

import os
from pathlib import Path

import numpy as np
import pytest

from handsoff.config import Settings
from handsoff.core.system import LtiSystem
from handsoff.solver.transcription import transcribe

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def di() -> LtiSystem:
    return LtiSystem.double_integrator()


@pytest.fixture
def scalar() -> LtiSystem:
    return LtiSystem.integrator()


@pytest.fixture
def settings() -> Settings:
    return Settings()


@pytest.fixture
def nonnormal_problem(di):
    """Double integrator from (1, -1) with T = 5 on 500 intervals."""
    return transcribe(di, np.array([1.0, -1.0]), 5.0, 500)


@pytest.fixture
def small_nonnormal_problem(di):
    """Same instance on a 100-interval grid (Δ = 0.05)."""
    return transcribe(di, np.array([1.0, -1.0]), 5.0, 100)


@pytest.fixture(autouse=True)
def _isolated_cwd(tmp_path, monkeypatch):
    """Keep stray handsoff.toml / .env / HANDSOFF_* out of every test."""
    monkeypatch.chdir(tmp_path)
    for key in list(os.environ):
        if key.startswith("HANDSOFF_"):
            monkeypatch.delenv(key)

import os

import pytest

from handsoff.config import Settings, load_settings
from handsoff.errors import ConfigError


@pytest.fixture
def clean_environ(mocker):
    """Undo whatever load_dotenv writes into os.environ."""
    mocker.patch.dict(os.environ)


class TestSettings:
    def test_defaults(self):
        s = Settings()
        assert s.n_intervals == 500
        assert s.p == 0.5
        assert s.tie_break == "compact"
        assert s.workers == 1

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n_intervals": 0},
            {"p": 1.0},
            {"p": 0.0},
            {"reweight_epsilon": 0.0},
            {"reweight_max_iter": 0},
            {"workers": 0},
            {"refactor_every": 0},
            {"tie_break": "leftmost"},
            {"zero_tol": -1e-9},
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ConfigError):
            Settings(**kwargs)

    def test_replace_ignores_none(self):
        s = Settings().replace(p=0.3, n_intervals=None)
        assert s.p == 0.3
        assert s.n_intervals == 500

    def test_as_dict(self):
        assert Settings().as_dict()["certificate_tol"] == 1e-6


class TestLoadSettings:
    def test_no_sources(self):
        assert load_settings(environ={}) == Settings()

    def test_explicit_toml(self, tmp_path):
        path = tmp_path / "custom.toml"
        path.write_text("[tool.handsoff]\nn_intervals = 200\np = 0.3\n")
        s = load_settings(path, environ={})
        assert (s.n_intervals, s.p) == (200, 0.3)

    def test_bare_table(self, tmp_path):
        path = tmp_path / "custom.toml"
        path.write_text("[handsoff]\nworkers = 4\n")
        assert load_settings(path, environ={}).workers == 4

    def test_working_directory_file(self, tmp_path):
        (tmp_path / "handsoff.toml").write_text('[tool.handsoff]\ntie_break = "none"\n')
        assert load_settings(environ={}).tie_break == "none"

    def test_environment_beats_file(self, tmp_path):
        path = tmp_path / "custom.toml"
        path.write_text("[tool.handsoff]\nn_intervals = 200\n")
        s = load_settings(path, environ={"HANDSOFF_N_INTERVALS": "300", "HANDSOFF_P": "0.25"})
        assert s.n_intervals == 300
        assert s.p == 0.25

    def test_unrelated_variables_ignored(self):
        s = load_settings(environ={"HANDSOFF_COLOR": "1", "PATH": "/bin"})
        assert s == Settings()

    def test_dotenv(self, tmp_path, clean_environ):
        (tmp_path / ".env").write_text("HANDSOFF_WORKERS=3\n")
        assert load_settings().workers == 3

    def test_process_environment_beats_dotenv(self, tmp_path, clean_environ, monkeypatch):
        (tmp_path / ".env").write_text("HANDSOFF_WORKERS=3\n")
        monkeypatch.setenv("HANDSOFF_WORKERS", "5")
        assert load_settings().workers == 5

    def test_dotenv_can_be_disabled(self, tmp_path, clean_environ):
        (tmp_path / ".env").write_text("HANDSOFF_WORKERS=3\n")
        assert load_settings(use_dotenv=False).workers == 1

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "custom.toml"
        path.write_text("[tool.handsoff]\nsolver = 'highs'\n")
        with pytest.raises(ConfigError, match="Unknown setting 'solver'"):
            load_settings(path, environ={})

    def test_bad_value(self):
        with pytest.raises(ConfigError, match="cannot parse"):
            load_settings(environ={"HANDSOFF_N_INTERVALS": "many"})

    def test_out_of_range_value(self):
        with pytest.raises(ConfigError, match="p must lie"):
            load_settings(environ={"HANDSOFF_P": "1.5"})

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_settings(tmp_path / "absent.toml", environ={})

    def test_malformed_toml(self, tmp_path):
        path = tmp_path / "broken.toml"
        path.write_text("[tool.handsoff\n")
        with pytest.raises(ConfigError, match="Cannot read"):
            load_settings(path, environ={})

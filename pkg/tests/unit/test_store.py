import json
import math

import numpy as np
import pytest

from handsoff.core.signal import ControlSignal
from handsoff.core.system import LtiSystem
from handsoff.errors import ConfigError
from handsoff.io.checks import Severity
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
from handsoff.value_map.field import GridAxis, ValueField


class TestLoadSystem:
    def test_json(self, fixtures_dir, di):
        assert load_system(fixtures_dir / "di.json") == di

    def test_yaml(self, fixtures_dir, di):
        assert load_system(fixtures_dir / "di.yaml") == di

    def test_scalar(self, fixtures_dir, scalar):
        assert load_system(fixtures_dir / "scalar.json") == scalar

    def test_label_is_optional(self, tmp_path):
        path = tmp_path / "plant.json"
        path.write_text(json.dumps({"n": 1, "A": [[-1.0]], "B": [2.0]}))
        system = load_system(path)
        assert system.label is None
        assert system.a_matrix[0, 0] == -1.0

    @pytest.mark.parametrize(
        "document, message",
        [
            ({"A": [[0.0]], "B": [1.0]}, "missing field 'n'"),
            ({"n": 1, "B": [1.0]}, "missing field 'A'"),
            ({"n": 1, "A": [[0.0]], "B": [1.0], "C": [1.0]}, "unknown field"),
            ({"n": 0, "A": [], "B": []}, "positive integer"),
            ({"n": True, "A": [[0.0]], "B": [1.0]}, "positive integer"),
            ({"n": "1", "A": [[0.0]], "B": [1.0]}, "positive integer"),
            ({"n": 2, "A": [[0.0, 1.0]], "B": [0.0, 1.0]}, "must be 2x2"),
            ({"n": 2, "A": [[0.0, 1.0], [0.0, 0.0]], "B": [1.0]}, "2 entries"),
            ({"n": 1, "A": [["x"]], "B": [1.0]}, "numeric matrix"),
            ([1, 2, 3], "expected a mapping"),
        ],
    )
    def test_rejects(self, tmp_path, document, message):
        path = tmp_path / "plant.json"
        path.write_text(json.dumps(document))
        with pytest.raises(ConfigError, match=message):
            load_system(path)

    def test_non_finite_entries(self, tmp_path):
        path = tmp_path / "plant.yaml"
        path.write_text("n: 1\nA: [[.nan]]\nB: [1.0]\n")
        with pytest.raises(ConfigError, match="finite"):
            load_system(path)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "plant.json"
        path.write_text('{"n": 1,\n "A": [[0.0]]\n')
        with pytest.raises(ConfigError, match="invalid JSON at line"):
            load_system(path)

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "plant.yml"
        path.write_text("n: 1\nA: [[0.0\nB: [1.0]\n")
        with pytest.raises(ConfigError, match="invalid YAML"):
            load_system(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="Cannot read system file"):
            load_system(tmp_path / "absent.json")


class TestControlCsv:
    def test_format(self, tmp_path):
        path = write_control_csv(tmp_path / "control.csv", ControlSignal(1.0, [0.5, -0.0, 1.0, 0.0]))
        assert path.read_bytes() == b"t_start,u\n0.0,0.5\n0.25,0.0\n0.5,1.0\n0.75,0.0\n"

    def test_format_float(self):
        assert format_float(-0.0) == "0.0"
        assert format_float(np.float64(0.1)) == "0.1"
        assert float(format_float(1 / 3)) == 1 / 3

    def test_read_back(self, tmp_path):
        u = ControlSignal(5.0, np.linspace(-1.0, 1.0, 50))
        path = write_control_csv(tmp_path / "control.csv", u)
        assert read_control_csv(path, 5.0) == u

    def test_several_columns(self, tmp_path):
        a = ControlSignal(2.0, [1.0, 0.0])
        b = ControlSignal(2.0, [0.5, 0.5])
        path = write_controls_csv(tmp_path / "demo.csv", 2.0, {"u_handsoff": a, "u_l1": b})
        assert path.read_text() == "t_start,u_handsoff,u_l1\n0.0,1.0,0.5\n1.0,0.0,0.5\n"
        assert read_control_csv(path, 2.0, column="u_l1") == b

    def test_several_columns_need_one_grid(self, tmp_path):
        with pytest.raises(ValueError, match="not on the"):
            write_controls_csv(
                tmp_path / "demo.csv",
                2.0,
                {"a": ControlSignal(2.0, [1.0, 0.0]), "b": ControlSignal(2.0, [1.0, 0.0, 0.0])},
            )
        with pytest.raises(ValueError):
            write_controls_csv(tmp_path / "demo.csv", 2.0, {})

    @pytest.mark.parametrize(
        "text, message",
        [
            ("t,u\n0.0,1.0\n", "need columns"),
            ("t_start,u\n0.0,abc\n", "line 2: not a number"),
            ("t_start,u\n", "no samples"),
            ("t_start,u\n0.0,1.0\n0.3,1.0\n", "uniform grid"),
        ],
    )
    def test_read_rejects(self, tmp_path, text, message):
        path = tmp_path / "control.csv"
        path.write_text(text)
        with pytest.raises(ConfigError, match=message):
            read_control_csv(path, 1.0)

    def test_read_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="Cannot read control file"):
            read_control_csv(tmp_path / "absent.csv", 1.0)


def test_value_csv_marks_unreachable(tmp_path, scalar):
    field = ValueField(
        system=scalar,
        axes=(GridAxis(-2.0, 0.0, 3),),
        values=np.array([np.nan, 1.0, 0.0]),
        horizon=1.0,
        n_intervals=10,
        duals=np.zeros((3, 1)),
    )
    path = write_value_csv(tmp_path / "value.csv", field)
    assert path.read_text() == "xi1,value\n-2.0,\n-1.0,1.0\n0.0,0.0\n"


def test_value_csv_two_axes(tmp_path, di):
    field = ValueField(
        system=di,
        axes=(GridAxis(0.0, 1.0, 2), GridAxis(0.0, 1.0, 2)),
        values=np.array([[0.0, 0.5], [0.25, np.nan]]),
        horizon=1.0,
        n_intervals=10,
        duals=np.zeros((2, 2, 2)),
    )
    lines = write_value_csv(tmp_path / "value.csv", field).read_text().splitlines()
    assert lines == ["xi1,xi2,value", "0.0,0.0,0.0", "0.0,1.0,0.5", "1.0,0.0,0.25", "1.0,1.0,"]


class TestJson:
    def test_serialises_numpy_enums_and_non_finite(self, tmp_path):
        payload = {"b": np.array([1.0, 2.0]), "a": Severity.blocking, "c": math.inf, "d": np.int64(3)}
        path = write_json(tmp_path / "report.json", payload)
        text = path.read_text()
        assert text.endswith("\n")
        assert list(json.loads(text)) == ["a", "b", "c", "d"]
        assert json.loads(text) == {"a": "blocking", "b": [1.0, 2.0], "c": None, "d": 3}

    def test_manifest_is_atomic_and_deterministic(self, tmp_path):
        manifest = RunManifest(
            command="solve",
            parameters={"xi": [1.0, -1.0], "horizon": 5.0},
            settings={"n_intervals": 500},
            inputs={"system": "abc"},
            outputs=["control.csv"],
        )
        first = write_manifest(tmp_path / "manifest.json", manifest).read_bytes()
        second = write_manifest(tmp_path / "manifest.json", manifest).read_bytes()
        assert first == second
        assert [p.name for p in tmp_path.iterdir()] == ["manifest.json"]
        assert read_manifest(tmp_path / "manifest.json") == manifest

    def test_read_manifest_errors(self, tmp_path):
        with pytest.raises(ConfigError):
            read_manifest(tmp_path / "absent.json")
        path = tmp_path / "manifest.json"
        path.write_text('{"parameters": {}}')
        with pytest.raises(ConfigError, match="malformed"):
            read_manifest(path)


def test_hashes(tmp_path):
    path = tmp_path / "data.txt"
    path.write_bytes(b"abc")
    assert file_sha256(path) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    hashes = input_hashes([("data", path), ("missing", tmp_path / "nope"), ("none", None)])
    assert hashes == {"data": file_sha256(path)}


def test_system_round_trip_through_yaml(tmp_path):
    system = LtiSystem([[0.0, 1.0], [-2.0, -0.5]], [0.0, 1.0], label="oscillator")
    path = tmp_path / "plant.yaml"
    path.write_text(
        "n: 2\nA:\n  - [0.0, 1.0]\n  - [-2.0, -0.5]\nB: [0.0, 1.0]\nlabel: oscillator\n"
    )
    assert load_system(path) == system

import csv
import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from handsoff import __version__
from handsoff.cli import cli


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def di_file(fixtures_dir) -> str:
    return str(fixtures_dir / "di.json")


@pytest.fixture
def scalar_file(fixtures_dir) -> str:
    return str(fixtures_dir / "scalar.json")


def read_column(path: Path, column: str) -> np.ndarray:
    with open(path, newline="") as fh:
        return np.array([float(row[column]) for row in csv.DictReader(fh)])


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


class TestSolve:
    def test_nonnormal_instance(self, runner, di_file, tmp_path):
        out = tmp_path / "run"
        result = runner.invoke(
            cli,
            ["solve", "--system", di_file, "--xi", "1,-1", "--horizon", "5", "--grid", "500", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        assert "[Solve]" in result.output
        assert "[0.5, 1.5)" in result.output

        lines = (out / "control.csv").read_text().splitlines()
        assert lines[0] == "t_start,u"
        assert len(lines) == 501
        u = read_column(out / "control.csv", "u")
        np.testing.assert_array_equal(np.flatnonzero(u), np.arange(50, 150))

        report = json.loads((out / "report.json").read_text())
        assert report["support"] == [[pytest.approx(0.5), pytest.approx(1.5)]]
        assert report["summary"]["l0"] == pytest.approx(1.0)
        assert report["norms"]["l1"] == pytest.approx(1.0, abs=1e-6)
        assert report["certificate"]["max_violation"] <= 1e-6

        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "solve"
        assert manifest["outputs"] == ["control.csv", "report.json"]
        assert set(manifest["inputs"]) == {"system"}
        assert manifest["settings"]["n_intervals"] == 500
        assert manifest["version"] == __version__

    def test_origin_gives_zero_control(self, runner, di_file, tmp_path):
        result = runner.invoke(
            cli, ["solve", "--system", di_file, "--xi", "0,0", "--horizon", "5", "--grid", "100", "--out", str(tmp_path)]
        )
        assert result.exit_code == 0, result.output
        assert not np.any(read_column(tmp_path / "control.csv", "u"))

    @pytest.mark.parametrize("method", ["l1", "reweighted"])
    def test_other_methods(self, runner, di_file, tmp_path, method):
        result = runner.invoke(
            cli,
            ["solve", "--system", di_file, "--xi", "1,-1", "--horizon", "5", "--grid", "100",
             "--method", method, "--out", str(tmp_path)],
        )
        assert result.exit_code == 0, result.output
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["summary"]["l1"] == pytest.approx(1.0, abs=1e-9)
        assert report["certificate"] is not None

    def test_yaml_system(self, runner, fixtures_dir, tmp_path):
        result = runner.invoke(
            cli,
            ["solve", "--system", str(fixtures_dir / "di.yaml"), "--xi", "1,-1", "--horizon", "5",
             "--grid", "100", "--out", str(tmp_path)],
        )
        assert result.exit_code == 0, result.output

    def test_unreachable_exits_2(self, runner, scalar_file, tmp_path):
        result = runner.invoke(
            cli, ["solve", "--system", scalar_file, "--xi", "2", "--horizon", "1", "--grid", "50", "--out", str(tmp_path)]
        )
        assert result.exit_code == 2
        assert "[ERROR]" in result.output
        assert "not reachable" in result.output
        assert not (tmp_path / "control.csv").exists()

    @pytest.mark.parametrize(
        "args",
        [
            ["--xi", "1,-1", "--horizon", "5"],
            ["--system", "SYSTEM", "--horizon", "5"],
            ["--system", "SYSTEM", "--xi", "a,b", "--horizon", "5"],
            ["--system", "SYSTEM", "--xi", "1,-1", "--horizon", "-5"],
            ["--system", "SYSTEM", "--xi", "1,-1", "--horizon", "5", "--grid", "0"],
            ["--system", "SYSTEM", "--xi", "1,-1", "--horizon", "5", "--method", "simplex"],
            ["--system", "SYSTEM", "--xi", "1,-1,0", "--horizon", "5"],
            ["--system", "absent.json", "--xi", "1,-1", "--horizon", "5"],
        ],
    )
    def test_input_errors_exit_1(self, runner, di_file, args):
        args = [di_file if a == "SYSTEM" else a for a in args]
        result = runner.invoke(cli, ["solve", *args])
        assert result.exit_code == 1, result.output

    def test_malformed_system_file(self, runner, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"n": 2, "A": [[0, 1]], "B": [0, 1]}')
        result = runner.invoke(cli, ["solve", "--system", str(path), "--xi", "1,-1", "--horizon", "5"])
        assert result.exit_code == 1
        assert "must be 2x2" in result.output

    def test_settings_file(self, runner, di_file, tmp_path):
        config = tmp_path / "settings.toml"
        config.write_text("[tool.handsoff]\nn_intervals = 100\n")
        result = runner.invoke(
            cli,
            ["--config", str(config), "solve", "--system", di_file, "--xi", "1,-1", "--horizon", "5",
             "--out", str(tmp_path / "run")],
        )
        assert result.exit_code == 0, result.output
        assert len((tmp_path / "run" / "control.csv").read_text().splitlines()) == 101

    def test_bad_settings_file(self, runner, di_file, tmp_path):
        config = tmp_path / "settings.toml"
        config.write_text("[tool.handsoff]\nspeed = 3\n")
        result = runner.invoke(
            cli, ["--config", str(config), "solve", "--system", di_file, "--xi", "1,-1", "--horizon", "5"]
        )
        assert result.exit_code == 1
        assert "Unknown setting" in result.output

    def test_repeat_runs_are_byte_identical(self, runner, di_file, tmp_path):
        for name in ("a", "b"):
            result = runner.invoke(
                cli,
                ["solve", "--system", di_file, "--xi", "0.7,0.4", "--horizon", "4", "--grid", "120",
                 "--out", str(tmp_path / name)],
            )
            assert result.exit_code == 0, result.output
        for artifact in ("control.csv", "report.json", "manifest.json"):
            assert (tmp_path / "a" / artifact).read_bytes() == (tmp_path / "b" / artifact).read_bytes()


class TestDemo:
    def test_default_run(self, runner, tmp_path):
        out = tmp_path / "demo"
        result = runner.invoke(cli, ["demo-di", "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert "t1=0.5  t2=1.5" in result.output
        assert "[0.5, 1.5)" in result.output
        lines = {line.split()[0] + " " + line.split()[1]: line for line in result.output.splitlines() if "L0" in line}
        assert "L0 1.000000" in lines["u2 (max"]
        assert "L0 2.000000" in lines["u1 (L1,"]
        assert "L1 1.000000000" in lines["u2 (max"]
        assert "L1 1.000000000" in lines["u1 (L1,"]

        header = (out / "demo.csv").read_text().splitlines()[0]
        assert header == "t_start,u_handsoff,u_l1"
        u2 = read_column(out / "demo.csv", "u_handsoff")
        u1 = read_column(out / "demo.csv", "u_l1")
        np.testing.assert_array_equal(np.flatnonzero(u2), np.arange(50, 150))
        np.testing.assert_array_equal(np.flatnonzero(u1), np.arange(0, 200))
        t_start = read_column(out / "demo.csv", "t_start")
        assert (t_start[50], t_start[150]) == (pytest.approx(0.5), pytest.approx(1.5))

        svg = (out / "demo.svg").read_text()
        assert svg.count('class="curve"') == 2
        assert 'width="800"' in svg and 'height="400"' in svg

        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "demo-di"
        assert manifest["outputs"] == ["demo.csv", "demo.svg"]

    def test_outside_nonnormal_region(self, runner, tmp_path):
        result = runner.invoke(cli, ["demo-di", "--xi", "0.4,-1", "--out", str(tmp_path)])
        assert result.exit_code == 1
        assert "non-normal region" in result.output

    def test_needs_two_states(self, runner, tmp_path):
        result = runner.invoke(cli, ["demo-di", "--xi", "1", "--out", str(tmp_path)])
        assert result.exit_code == 1

    def test_repeat_runs_are_byte_identical(self, runner, tmp_path):
        for name in ("a", "b"):
            assert runner.invoke(cli, ["demo-di", "--grid", "100", "--out", str(tmp_path / name)]).exit_code == 0
        for artifact in ("demo.csv", "demo.svg", "manifest.json"):
            assert (tmp_path / "a" / artifact).read_bytes() == (tmp_path / "b" / artifact).read_bytes()


class TestValueMap:
    def test_double_integrator_grid(self, runner, tmp_path):
        result = runner.invoke(
            cli, ["value-map", "--range", "-1:1:3,-1:1:3", "--horizon", "5", "--grid", "100", "--out", str(tmp_path)]
        )
        assert result.exit_code == 0, result.output
        assert "9 of 9 point(s) reachable" in result.output
        with open(tmp_path / "value.csv", newline="") as fh:
            rows = {(float(r["xi1"]), float(r["xi2"])): r["value"] for r in csv.DictReader(fh)}
        assert float(rows[(0.0, 0.0)]) == 0.0
        assert float(rows[(1.0, -1.0)]) == pytest.approx(1.0, abs=1e-6)
        assert not (tmp_path / "probe.json").exists()

    def test_unreachable_row_is_empty(self, runner, tmp_path):
        result = runner.invoke(
            cli, ["value-map", "--range", "100:100:1,100:100:1", "--horizon", "5", "--grid", "50", "--out", str(tmp_path)]
        )
        assert result.exit_code == 0, result.output
        assert (tmp_path / "value.csv").read_text() == "xi1,xi2,value\n100.0,100.0,\n"

    def test_scalar_system(self, runner, scalar_file, tmp_path):
        result = runner.invoke(
            cli,
            ["value-map", "--system", scalar_file, "--range", "-2:2:5", "--horizon", "1", "--grid", "20",
             "--out", str(tmp_path)],
        )
        assert result.exit_code == 0, result.output
        assert (tmp_path / "value.csv").read_text().splitlines()[0] == "xi1,value"

    def test_help_documents_scalar_grids(self, runner):
        result = runner.invoke(cli, ["value-map", "--help"])
        assert result.exit_code == 0
        assert "1-D or 2-D" in result.output
        assert "xi1,value" in result.output
        assert "n > 2" in result.output

    def test_probe(self, runner, tmp_path):
        result = runner.invoke(
            cli,
            ["value-map", "--range", "-1:1:3,-1:1:3", "--horizon", "5", "--grid", "50", "--probe",
             "--trials", "5", "--seed", "1", "--out", str(tmp_path)],
        )
        assert result.exit_code == 0, result.output
        probe = json.loads((tmp_path / "probe.json").read_text())
        assert probe["trials"] == 5
        assert probe["max_violation"] <= 1e-8
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["outputs"] == ["probe.json", "value.csv"]
        assert manifest["parameters"]["seed"] == 1

    @pytest.mark.parametrize("spec", ["-1:1", "-1:1:3", "a:b:3,0:1:2"])
    def test_bad_range(self, runner, tmp_path, spec):
        result = runner.invoke(cli, ["value-map", "--range", spec, "--horizon", "5", "--out", str(tmp_path)])
        assert result.exit_code == 1

    def test_three_state_system(self, runner, tmp_path):
        path = tmp_path / "chain.json"
        path.write_text(json.dumps({"n": 3, "A": [[0, 1, 0], [0, 0, 1], [0, 0, 0]], "B": [0, 0, 1]}))
        result = runner.invoke(
            cli,
            ["value-map", "--system", str(path), "--range", "0:1:2,0:1:2,0:1:2", "--horizon", "1",
             "--out", str(tmp_path)],
        )
        assert result.exit_code == 1
        assert "n = 1 or 2" in result.output

    def test_workers_do_not_change_output(self, runner, tmp_path):
        for name, workers in (("serial", "1"), ("parallel", "3")):
            result = runner.invoke(
                cli,
                ["value-map", "--range", "-2:2:4,-2:2:4", "--horizon", "3", "--grid", "40",
                 "--workers", workers, "--out", str(tmp_path / name)],
            )
            assert result.exit_code == 0, result.output
        serial = (tmp_path / "serial" / "value.csv").read_bytes()
        assert serial == (tmp_path / "parallel" / "value.csv").read_bytes()


class TestReachable:
    def test_reachable(self, runner, scalar_file):
        result = runner.invoke(cli, ["reachable", "--system", scalar_file, "--xi", "0.5", "--horizon", "1", "--grid", "20"])
        assert result.exit_code == 0
        assert "is reachable" in result.output

    def test_not_reachable(self, runner, scalar_file):
        result = runner.invoke(cli, ["reachable", "--system", scalar_file, "--xi", "1.5", "--horizon", "1", "--grid", "20"])
        assert result.exit_code == 2
        assert "is not reachable" in result.output

    def test_dimension_mismatch(self, runner, di_file):
        result = runner.invoke(cli, ["reachable", "--system", di_file, "--xi", "1", "--horizon", "1"])
        assert result.exit_code == 1


class TestVerify:
    def solve(self, runner, di_file, out):
        result = runner.invoke(
            cli, ["solve", "--system", di_file, "--xi", "1,-1", "--horizon", "5", "--grid", "500", "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        return out / "control.csv"

    def test_solver_output_passes(self, runner, di_file, tmp_path):
        control = self.solve(runner, di_file, tmp_path)
        result = runner.invoke(
            cli, ["verify", "--control", str(control), "--system", di_file, "--xi", "1,-1", "--horizon", "5"]
        )
        assert result.exit_code == 0, result.output
        assert "[FAIL]" not in result.output
        assert "all blocking checks passed" in result.output

    def test_demo_u2_passes(self, runner, di_file, tmp_path):
        assert runner.invoke(cli, ["demo-di", "--out", str(tmp_path)]).exit_code == 0
        result = runner.invoke(
            cli,
            ["verify", "--control", str(tmp_path / "demo.csv"), "--column", "u_handsoff", "--system", di_file,
             "--xi", "1,-1", "--horizon", "5"],
        )
        assert result.exit_code == 0, result.output

    def test_truncated_control_fails(self, runner, di_file, tmp_path):
        control = self.solve(runner, di_file, tmp_path)
        lines = control.read_text().splitlines()
        truncated = [lines[0]]
        for line in lines[1:]:
            t, u = line.split(",")
            truncated.append(f"{t},{u if float(t) < 1.0 else '0.0'}")
        control.write_text("\n".join(truncated) + "\n")

        result = runner.invoke(
            cli, ["verify", "--control", str(control), "--system", di_file, "--xi", "1,-1", "--horizon", "5"]
        )
        assert result.exit_code == 3
        assert "[FAIL] feasibility" in result.output
        assert "verification FAILED" in result.output

    def test_zero_control_at_origin(self, runner, di_file, tmp_path):
        control = tmp_path / "zero.csv"
        control.write_text("t_start,u\n" + "".join(f"{k * 0.5!r},0.0\n" for k in range(4)))
        result = runner.invoke(
            cli, ["verify", "--control", str(control), "--system", di_file, "--xi", "0,0", "--horizon", "2"]
        )
        assert result.exit_code == 0, result.output

    def test_json_output(self, runner, di_file, tmp_path):
        control = self.solve(runner, di_file, tmp_path)
        result = runner.invoke(
            cli,
            ["verify", "--control", str(control), "--system", di_file, "--xi", "1,-1", "--horizon", "5", "--json"],
        )
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["passed"] is True
        assert {c["name"] for c in payload["checks"]} >= {"feasibility", "magnitude", "certificate"}

    def test_missing_column(self, runner, di_file, tmp_path):
        control = self.solve(runner, di_file, tmp_path)
        result = runner.invoke(
            cli,
            ["verify", "--control", str(control), "--column", "u_l1", "--system", di_file, "--xi", "1,-1",
             "--horizon", "5"],
        )
        assert result.exit_code == 1
        assert "need columns" in result.output

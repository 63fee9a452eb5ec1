"""
Tests for the command-line entry point and its exit codes.
"""

import argparse
import json

import pytest
import yaml

from main import main, parse_tolerances


class TestParseTolerances:
    """--tol parsing."""

    def test_pairs(self):
        assert parse_tolerances(["frame.invariants=1e-6", " curvat.rigged =2e-5"]) == {
            "frame.invariants": 1e-6,
            "curvat.rigged": 2e-5,
        }

    @pytest.mark.parametrize("item", ["frame.invariants", "frame.invariants=small"])
    def test_malformed(self, item):
        with pytest.raises(argparse.ArgumentTypeError, match="--tol"):
            parse_tolerances([item])


class TestCommands:
    """Subcommands and exit codes."""

    def test_list(self, capsys):
        assert main(["list"]) == 0
        out = capsys.readouterr().out
        assert "minkowski_hyperplane" in out
        assert "flat_torus" in out

    def test_validate_ok(self, capsys):
        assert main(["validate", "desitter_horizon", "--samples", "3"]) == 0
        assert "is valid" in capsys.readouterr().out

    def test_validate_invalid_file(self, tmp_path, scenario_dict, capsys):
        scenario_dict["metric"][0][0] = "-1 *"
        path = tmp_path / "broken.yaml"
        path.write_text(yaml.safe_dump(scenario_dict), encoding="utf-8")
        assert main(["validate", str(path)]) == 1
        assert "metric.0.0:" in capsys.readouterr().out

    def test_run_unknown_scenario(self, capsys):
        assert main(["run", "schwarzschild"]) == 2
        assert "Unknown scenario" in capsys.readouterr().err

    def test_run_json(self, tmp_path, capsys):
        """JSON output is the report alone, and --report writes the same bytes."""
        path = tmp_path / "report.json"
        code = main(["run", "minkowski_hyperplane", "--suites", "frame", "--samples", "3", "--seed", "1",
                     "--format", "json", "--report", str(path)])
        out = capsys.readouterr().out
        assert code == 0
        assert out == path.read_text(encoding="utf-8")
        data = json.loads(out)
        assert data["passed"] is True
        assert data["seed"] == 1
        assert {c["id"] for c in data["checks"]} == {"frame.invariants", "frame.bianchi", "frame.radical_degeneracy"}

    def test_run_failing_check_exits_one(self, capsys):
        code = main(["run", "minkowski_hyperplane", "--suites", "frame", "--samples", "2",
                     "--tol", "frame.invariants=0"])
        assert code == 1
        assert "1 failed" in capsys.readouterr().out

    def test_run_non_null_scenario_exits_two(self, tmp_path, scenario_dict, capsys):
        scenario_dict["level_function"] = "t - 0.5*x"
        path = tmp_path / "spacelike.yaml"
        path.write_text(yaml.safe_dump(scenario_dict), encoding="utf-8")
        assert main(["run", str(path), "--samples", "4"]) == 2
        assert "L is not null" in capsys.readouterr().err

    def test_run_bad_suite(self, capsys):
        assert main(["run", "minkowski_hyperplane", "--suites", "holonomy", "--samples", "2"]) == 2
        assert "Unknown suite" in capsys.readouterr().err

    def test_hunt_without_periodic_coordinates(self, capsys):
        assert main(["hunt", "minkowski_hyperplane"]) == 2
        assert "no periodic coordinates" in capsys.readouterr().err

    def test_hunt_writes_csv(self, tmp_path, capsys):
        path = tmp_path / "orbits.csv"
        assert main(["hunt", "flat_torus", "--levels", "0,1", "--report", str(path)]) == 0
        assert path.read_text(encoding="utf-8").startswith("guess,position,velocity,period,closure,causal,converged")

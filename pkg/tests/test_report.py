"""
Tests for check records and the report formats.
"""

import json
import math

from report import CheckRecord, CheckReport, decimal, validate_report


def _report():
    report = CheckReport(scenario="plane", seed=7, samples=3)
    report.add(CheckRecord.measured("frame.invariants", "g(ξ,ξ)=0", "frame", 1e-9, [1e-12, -3e-11, 0.0]))
    report.add(CheckRecord.measured("curvat.rigged", "K^T = K~", "curvat", 1e-5, [2e-4]))
    report.add(CheckRecord.skipped("flow.killing_xi", "L_ξ g~ = 0", "flow", 1e-8, "rigging is not closed"))
    report.facts = {"max_abs_B": 0.0, "totally_geodesic": True}
    return report


class TestCheckRecord:
    """Status rules for a single check."""

    def test_worst_residual_decides(self):
        record = CheckRecord.measured("frame.invariants", "", "frame", 1e-9, [1e-12, -3e-11])
        assert record.status == "pass"
        assert record.samples == 2
        assert record.max_residual == 3e-11

    def test_tolerance_is_strict(self):
        assert CheckRecord.measured("a.b", "", "a", 1e-8, [1e-8]).status == "fail"

    def test_nan_fails(self):
        record = CheckRecord.measured("a.b", "", "a", 1.0, [0.0, float("nan")])
        assert record.status == "fail"
        assert math.isnan(record.max_residual)

    def test_no_samples_is_skip(self):
        record = CheckRecord.measured("a.b", "", "a", 1.0, [])
        assert record.status == "skip"
        assert record.reason == "no samples"

    def test_decimal_round_trips(self):
        assert decimal(0.1) == "0.10000000000000001"
        assert float(decimal(1.0 / 3.0)) == 1.0 / 3.0
        assert decimal(None) is None


class TestCheckReport:
    """Aggregate status and output formats."""

    def test_skips_do_not_fail_the_report(self):
        report = CheckReport(scenario="plane", seed=1, samples=1)
        report.add(CheckRecord.skipped("flow.killing_xi", "", "flow", 1e-8, "rigging is not closed"))
        assert report.passed
        report.add(CheckRecord.failed("flow.lemma", "", "flow", 1e-7, "Failed to run suite"))
        assert not report.passed

    def test_counts(self):
        assert _report().counts == {"pass": 1, "fail": 1, "skip": 1}

    def test_json_is_byte_stable(self):
        """Records come out sorted by id regardless of insertion order."""
        first = _report()
        second = _report()
        second.records.reverse()
        assert first.to_json() == second.to_json()
        ids = [c["id"] for c in json.loads(first.to_json())["checks"]]
        assert ids == sorted(ids)

    def test_residuals_are_decimal_strings(self):
        data = _report().to_dict()
        check = next(c for c in data["checks"] if c["id"] == "curvat.rigged")
        assert check["max_residual"] == "0.00020000000000000001"
        assert check["tolerance"] == "1.0000000000000001e-05"
        assert data["facts"]["max_abs_B"] == "0"

    def test_timing_is_opt_in(self):
        report = _report()
        report.wall_time = 1.23456
        assert "wall_time" not in report.to_dict()
        assert report.to_dict(timing=True)["wall_time"] == 1.235

    def test_schema_accepts_report(self):
        assert validate_report(_report().to_dict(timing=False)) == []

    def test_schema_rejects_bad_status(self):
        data = _report().to_dict()
        data["checks"][0]["status"] = "maybe"
        problems = validate_report(data)
        assert len(problems) == 1
        assert problems[0].startswith("checks.0.status:")

    def test_text_table(self):
        text = _report().to_text()
        assert text.startswith("Scenario: plane  (seed 7, 3 samples")
        assert "[frame]" in text and "[curvat]" in text
        assert "rigging is not closed" in text
        assert text.rstrip().endswith("1 passed, 1 failed, 1 skipped")

    def test_frame_columns(self):
        frame = _report().to_frame()
        assert list(frame["check"]) == ["curvat.rigged", "frame.invariants", "flow.killing_xi"]
        assert list(frame["status"]) == ["fail", "pass", "skip"]

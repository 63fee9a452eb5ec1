"""
Check records and reports: byte-stable JSON, per-suite text tables, and the
report JSON Schema.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import pandas as pd
from jsonschema import Draft202012Validator

ENGINE_VERSION = "0.1.0"
STATUSES = ("pass", "fail", "skip")


def decimal(value: Optional[float]) -> Optional[str]:
    """17 significant digits, so the float round-trips exactly."""
    if value is None:
        return None
    return format(float(value), ".17g")


@dataclass
class CheckRecord:
    """One check: the worst residual over its samples against a tolerance."""

    id: str
    anchor: str
    suite: str
    tolerance: float
    samples: int = 0
    max_residual: Optional[float] = None
    status: str = "skip"
    reason: str = ""
    detail: Dict[str, float] = field(default_factory=dict)

    @classmethod
    def measured(cls, id: str, anchor: str, suite: str, tolerance: float, residuals, detail=None) -> "CheckRecord":
        """pass iff every residual is finite and below the tolerance."""
        residuals = [abs(float(r)) for r in residuals]
        if not residuals:
            return cls.skipped(id, anchor, suite, tolerance, "no samples")
        worst = math.nan if any(math.isnan(r) for r in residuals) else max(residuals)
        status = "pass" if worst < tolerance else "fail"
        return cls(id, anchor, suite, tolerance, len(residuals), worst, status, detail=dict(detail or {}))

    @classmethod
    def skipped(cls, id: str, anchor: str, suite: str, tolerance: float, reason: str) -> "CheckRecord":
        return cls(id, anchor, suite, tolerance, status="skip", reason=reason)

    @classmethod
    def failed(cls, id: str, anchor: str, suite: str, tolerance: float, reason: str, samples: int = 0) -> "CheckRecord":
        return cls(id, anchor, suite, tolerance, samples=samples, status="fail", reason=reason)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> Dict[str, Any]:
        out = {
            "id": self.id,
            "anchor": self.anchor,
            "suite": self.suite,
            "samples": self.samples,
            "max_residual": decimal(self.max_residual),
            "tolerance": decimal(self.tolerance),
            "status": self.status,
        }
        if self.reason:
            out["reason"] = self.reason
        if self.detail:
            out["detail"] = {k: decimal(v) for k, v in sorted(self.detail.items())}
        return out


@dataclass
class CheckReport:
    scenario: str
    seed: int
    samples: int
    records: List[CheckRecord] = field(default_factory=list)
    facts: Dict[str, Any] = field(default_factory=dict)
    version: str = ENGINE_VERSION
    wall_time: Optional[float] = None

    def add(self, record: CheckRecord) -> None:
        self.records.append(record)

    def extend(self, records) -> None:
        self.records.extend(records)

    @property
    def ordered(self) -> List[CheckRecord]:
        return sorted(self.records, key=lambda r: r.id)

    @property
    def passed(self) -> bool:
        """True iff no executed check failed (skipped checks do not count)."""
        return not any(r.status == "fail" for r in self.records)

    @property
    def counts(self) -> Dict[str, int]:
        return {status: sum(r.status == status for r in self.records) for status in STATUSES}

    def to_dict(self, timing: bool = False) -> Dict[str, Any]:
        out = {
            "scenario": self.scenario,
            "version": self.version,
            "seed": self.seed,
            "samples": self.samples,
            "passed": self.passed,
            "counts": self.counts,
            "facts": {k: decimal(v) if isinstance(v, float) else v for k, v in sorted(self.facts.items())},
            "checks": [r.to_dict() for r in self.ordered],
        }
        if timing and self.wall_time is not None:
            out["wall_time"] = round(self.wall_time, 3)
        return out

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "suite": r.suite,
                "check": r.id,
                "samples": r.samples,
                "max_residual": r.max_residual,
                "tolerance": r.tolerance,
                "status": r.status,
                "reason": r.reason,
            }
            for r in self.ordered
        ]
        return pd.DataFrame(rows, columns=["suite", "check", "samples", "max_residual", "tolerance", "status", "reason"])

    def to_text(self, timing: bool = False) -> str:
        frame = self.to_frame()
        lines = [f"Scenario: {self.scenario}  (seed {self.seed}, {self.samples} samples, version {self.version})"]
        for key, value in sorted(self.facts.items()):
            lines.append(f"  {key}: {value}")
        for suite, group in frame.groupby("suite", sort=False):
            lines.append("")
            lines.append(f"[{suite}]")
            table = group.drop(columns=["suite"]).copy()
            table["max_residual"] = table["max_residual"].map(lambda v: "-" if v is None or pd.isna(v) else f"{v:.3e}")
            table["tolerance"] = table["tolerance"].map(lambda v: f"{v:.0e}")
            lines.append(table.to_string(index=False))
        counts = self.counts
        lines.append("")
        lines.append(f"{counts['pass']} passed, {counts['fail']} failed, {counts['skip']} skipped")
        if timing and self.wall_time is not None:
            lines.append(f"Wall time: {self.wall_time:.2f}s")
        return "\n".join(lines) + "\n"


_DECIMAL = {"type": ["string", "null"], "pattern": "^(-?[0-9.e+-]+|nan|-?inf)$"}

REPORT_SCHEMA: Dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "Check report",
    "type": "object",
    "required": ["scenario", "version", "seed", "samples", "passed", "counts", "facts", "checks"],
    "additionalProperties": False,
    "properties": {
        "scenario": {"type": "string"},
        "version": {"type": "string"},
        "seed": {"type": "integer"},
        "samples": {"type": "integer", "minimum": 0},
        "passed": {"type": "boolean"},
        "wall_time": {"type": "number", "minimum": 0},
        "counts": {
            "type": "object",
            "required": list(STATUSES),
            "additionalProperties": {"type": "integer", "minimum": 0},
        },
        "facts": {"type": "object"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "anchor", "suite", "samples", "max_residual", "tolerance", "status"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string", "pattern": "^[a-z]+\\.[A-Za-z0-9_]+$"},
                    "anchor": {"type": "string"},
                    "suite": {"type": "string"},
                    "samples": {"type": "integer", "minimum": 0},
                    "max_residual": _DECIMAL,
                    "tolerance": _DECIMAL,
                    "status": {"enum": list(STATUSES)},
                    "reason": {"type": "string"},
                    "detail": {"type": "object", "additionalProperties": _DECIMAL},
                },
            },
        },
    },
}

_VALIDATOR = Draft202012Validator(REPORT_SCHEMA)


def validate_report(data: Any) -> List[str]:
    """Schema problems of a report mapping, as "field.path: message" lines."""
    return [
        f"{'.'.join(str(p) for p in e.absolute_path) or '<root>'}: {e.message}"
        for e in sorted(_VALIDATOR.iter_errors(data), key=str)
    ]

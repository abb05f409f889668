"""Check verdicts and the JSON verification report."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    return obj


@dataclass
class Check:
    """One measured quantity against a threshold interval; ``passed=None`` means not evaluated."""

    value: float | None
    low: float | None = None
    high: float | None = None
    passed: bool | None = None
    note: str = ""

    @classmethod
    def within(cls, value, low=None, high=None, note: str = "") -> "Check":
        if value is None or not np.isfinite(value):
            return cls(None if value is None else float(value), low, high, False, note or "not finite")
        ok = (low is None or value >= low) and (high is None or value <= high)
        return cls(float(value), low, high, bool(ok), note)

    def to_dict(self) -> dict:
        return {"value": self.value, "low": self.low, "high": self.high, "passed": self.passed, "note": self.note}


@dataclass
class ConditionReport:
    name: str
    checks: dict[str, Check] = field(default_factory=dict)
    measured: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        verdicts = [c.passed for c in self.checks.values() if c.passed is not None]
        return bool(verdicts) and all(verdicts)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed,
                "checks": {k: c.to_dict() for k, c in self.checks.items()}, "measured": self.measured}


@dataclass
class VerificationReport:
    """Everything a verification run measured; thresholds are engineering defaults."""

    params: dict
    seed: int = 0
    conditions: list[ConditionReport] = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    holder: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def add(self, cond: ConditionReport) -> ConditionReport:
        self.conditions.append(cond)
        return cond

    def to_dict(self) -> dict:
        return _plain({
            "schema_version": SCHEMA_VERSION,
            "params": self.params,
            "seed": self.seed,
            "passed": self.passed,
            "conditions": [c.to_dict() for c in self.conditions],
            "fits": self.fits,
            "holder": self.holder,
            "residuals": self.residuals,
            "extras": self.extras,
            "thresholds_note": "pass/fail thresholds are engineering defaults, not constants of the theory",
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def write_report(report: VerificationReport | dict, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = report.to_json() if isinstance(report, VerificationReport) else json.dumps(_plain(report), indent=2,
                                                                                      sort_keys=True)
    path.write_text(text + "\n")
    return path

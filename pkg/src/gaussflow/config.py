"""Run configuration: JSON on disk, validated on load."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .params import FlowDomainError
from .scenarios import ScenarioError, ScenarioSpec

CONFIG_VERSION = 1
ANALYSES = ("interface", "exponent", "transversality", "holder", "hodograph", "dual", "intermediate")


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, message: str, key: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class RunConfig:
    scenario: ScenarioSpec
    t_end: float
    cfl: float = 0.4
    samples: list[float] = field(default_factory=list)
    analyses: list[str] = field(default_factory=lambda: list(ANALYSES))
    out: str = "out"
    seed: int = 0
    eps_int: float | None = None
    vol_floor: float = 0.0
    alpha: float = 0.25
    holder_pairs: int = 100_000
    schema_version: int = CONFIG_VERSION

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.schema_version != CONFIG_VERSION:
            raise ConfigError(f"expected {CONFIG_VERSION}, got {self.schema_version!r}", "schema_version")
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise ConfigError(f"must be positive, got {self.t_end!r}", "t_end")
        if not 0 < self.cfl <= 0.5:
            raise ConfigError(f"must lie in (0, 0.5], got {self.cfl!r}", "cfl")
        s = [float(t) for t in self.samples]
        if s != sorted(s):
            raise ConfigError("sample times must be sorted", "samples")
        if s and (s[0] < 0 or s[-1] > self.t_end):
            raise ConfigError(f"sample times must lie in [0, {self.t_end}]", "samples")
        self.samples = s
        for name in self.analyses:
            if name not in ANALYSES:
                raise ConfigError(f"unknown analysis {name!r}; expected a subset of {ANALYSES}", "analyses")
        if self.vol_floor < 0:
            raise ConfigError("must be nonnegative", "vol_floor")
        if self.holder_pairs < 1:
            raise ConfigError("must be positive", "holder_pairs")

    def sample_times(self) -> list[float]:
        """Configured samples, or 21 evenly spaced times when none are given."""
        if self.samples:
            return list(self.samples)
        return [self.t_end * i / 20 for i in range(21)]

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "scenario": self.scenario.to_dict(),
            "t_end": self.t_end,
            "cfl": self.cfl,
            "samples": self.samples,
            "analyses": list(self.analyses),
            "out": self.out,
            "seed": self.seed,
            "eps_int": self.eps_int,
            "vol_floor": self.vol_floor,
            "alpha": self.alpha,
            "holder_pairs": self.holder_pairs,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if "schema_version" not in d:
            raise ConfigError("missing", "schema_version")
        if d["schema_version"] != CONFIG_VERSION:
            raise ConfigError(f"expected {CONFIG_VERSION}, got {d['schema_version']!r}", "schema_version")
        allowed = set(cls.__dataclass_fields__)
        for key in d:
            if key not in allowed:
                raise ConfigError("unknown key", key)
        for key in ("scenario", "t_end"):
            if key not in d:
                raise ConfigError("missing", key)
        scen = d["scenario"]
        if not isinstance(scen, dict):
            raise ConfigError("must be an object", "scenario")
        try:
            spec = ScenarioSpec.from_dict(scen)
        except ScenarioError as exc:
            raise ConfigError(str(exc), f"scenario.{exc.key}" if exc.key else "scenario") from exc
        except FlowDomainError as exc:
            raise ConfigError(str(exc), "scenario.p") from exc
        except TypeError as exc:
            raise ConfigError(str(exc), "scenario") from exc
        kw = {k: v for k, v in d.items() if k != "scenario"}
        return cls(scenario=spec, **kw)


def load_config(path: str | Path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON ({exc})", "<file>") from exc
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object", "<file>")
    return RunConfig.from_dict(data)


def save_config(cfg: RunConfig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
    return path

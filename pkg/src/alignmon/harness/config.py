"""Experiment configuration: one flat record, file-loadable, flag-overridable.

A config file is a JSON document whose keys mirror the dataclass fields;
command-line flags win over file values.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from typing import Any

SCENARIOS = ("average", "differential", "weighted", "coverage", "sweep", "bench")
REFERENCES = ("environment", "expert", "gray", "black", "none")
RULES = ("brier", "spherical")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    scenario: str = "average"
    environment: str = "die"          # bundled name or file path
    corruption: str | None = None     # corruption kind, None = uncorrupted model
    corruption_params: dict[str, float] = field(default_factory=dict)
    reference: str = "none"
    rule: str = "brier"
    delta: float = 0.05
    steps: int = 1000
    runs: int = 5
    seed: int = 0
    avoid_rho: float = 0.01           # loop-avoidance strength for benchmark chains
    output: str | None = None
    fmt: str = "csv"                  # csv | jsonl where both make sense
    # sweep controls
    sweep_kind: str = "mean"          # mean | sd
    sweep_lo: float = 30.0
    sweep_hi: float = 70.0
    sweep_points: int = 41
    gauss_n: int = 100
    gauss_mean: float = 50.0
    gauss_sd: float = 5.0
    # bench controls
    bench_sizes: tuple[int, ...] = (10, 100, 1000, 10_000, 100_000, 1_000_000)
    bench_iters: int = 2000

    def validate(self) -> "ExperimentConfig":
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.rule not in RULES:
            raise ConfigError(f"unknown rule {self.rule!r}")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must be in (0,1), got {self.delta}")
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if self.reference not in REFERENCES:
            raise ConfigError(f"unknown reference {self.reference!r}")
        if not 0.0 <= self.avoid_rho < 1.0:
            raise ConfigError(f"avoid_rho must be in [0,1), got {self.avoid_rho}")
        if self.sweep_points < 2:
            raise ConfigError("sweep needs at least two points")
        return self

    @staticmethod
    def from_file(path: str) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file is not valid JSON: {exc}") from None
        return ExperimentConfig().merged(doc)

    def merged(self, overrides: dict[str, Any]) -> "ExperimentConfig":
        """New config with non-None overrides applied; unknown keys rejected."""
        names = {f.name for f in dataclasses.fields(self)}
        clean = {}
        for key, value in overrides.items():
            if key not in names:
                raise ConfigError(f"unknown config field {key!r}")
            if value is None:
                continue
            if key == "bench_sizes":
                value = tuple(int(v) for v in value)
            if key == "corruption_params":
                value = dict(value)
            clean[key] = value
        return dataclasses.replace(self, **clean).validate()

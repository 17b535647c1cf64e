from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml
from pydantic import BaseModel, Field, ValidationError

from homforge.failure_taxonomy import InputFormatError, PreconditionError


class SuiteParams(BaseModel):
    enabled: bool = True
    seed: int = Field(default=0, ge=0)
    instances: int = Field(default=1, ge=0, le=1_000_000)
    extra_instances: int = Field(default=0, ge=0, le=1_000_000)
    n: int = Field(default=1, ge=1, le=10_000)
    grid: int = Field(default=1, ge=1, le=10_000_000)


SUITE_DEFAULTS: dict[str, SuiteParams] = {
    "mycielski": SuiteParams(),
    "mycielski-extension": SuiteParams(seed=11, instances=200, n=8),
    "mindeg-threshold": SuiteParams(n=10),
    "domination-threshold": SuiteParams(),
    "pullout": SuiteParams(seed=5, instances=1000, n=60),
    "pullout-approx": SuiteParams(n=5),
    "regularity-approx": SuiteParams(seed=3, n=4),
    "star-figures": SuiteParams(),
    "triangle-forests": SuiteParams(seed=7, instances=50, n=5),
    "witness": SuiteParams(seed=1, n=24),
    "entropy": SuiteParams(seed=13, instances=20, grid=1_000_000),
    "hypergraphs": SuiteParams(seed=17, instances=20, n=60),
    "oracles": SuiteParams(seed=19, instances=100, extra_instances=300),
}


@dataclass
class SelfcheckProfile:
    suites: dict[str, SuiteParams]

    def suite(self, name: str) -> SuiteParams:
        try:
            return self.suites[name]
        except KeyError:
            raise PreconditionError(f"PRECONDITION_SUITE: unknown suite {name!r}") from None

    def enabled_suites(self, only: str | None = None) -> list[str]:
        if only is not None:
            self.suite(only)
            return [only]
        return [name for name, params in self.suites.items() if params.enabled]


def default_profile() -> SelfcheckProfile:
    return SelfcheckProfile({name: params.model_copy() for name, params in SUITE_DEFAULTS.items()})


def _load_yaml(path: str | Path) -> dict:
    try:
        with Path(path).open("r", encoding="utf-8") as handle:
            return yaml.safe_load(handle) or {}
    except yaml.YAMLError as exc:
        raise InputFormatError(f"INVALID_INPUT: {path}:0: {exc}") from None


def load_profile(path: str | Path | None = None) -> SelfcheckProfile:
    """Suite parameters from YAML, falling back to the built-in defaults.

    A missing file yields the defaults; unknown suite names are rejected.
    """
    if path is None or not Path(path).exists():
        return default_profile()
    raw = _load_yaml(path).get("suites", {}) or {}
    unknown = sorted(set(raw) - set(SUITE_DEFAULTS))
    if unknown:
        raise InputFormatError(f"INVALID_INPUT: {path}:0: unknown suites {unknown}")
    suites: dict[str, SuiteParams] = {}
    for name, defaults in SUITE_DEFAULTS.items():
        merged = {**defaults.model_dump(), **(raw.get(name) or {})}
        try:
            suites[name] = SuiteParams.model_validate(merged)
        except ValidationError as exc:
            raise InputFormatError(f"INVALID_INPUT: {path}:0: suite {name}: {exc}") from None
    return SelfcheckProfile(suites)

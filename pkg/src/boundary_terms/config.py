"""Scenario configs: INI files with four sections, validated strictly.

Example::

    [scenario]
    kind = bloch

    [physics]
    length = 1.0
    potential = cosine
    amplitude = 0.5
    k_points = 33

    [numerics]
    n = 256
    tolerance = 1e-5

Unknown sections or keys are rejected, as are non-positive numerical
parameters.  Errors carry the offending key.
"""

from __future__ import annotations

import configparser
import math
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError

ScenarioKind = Literal["free_particle", "quantum_well", "bloch", "ab_ring", "superposition", "berry_two_level"]
MIN_TOLERANCE = 1e-15


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


def _split(value):
    if isinstance(value, str):
        return [p.strip() for p in value.split(",") if p.strip()]
    return value


class ScenarioSection(_Section):
    kind: ScenarioKind
    name: str = ""


class PhysicsSection(_Section):
    length: float = Field(1.0, gt=0)
    k_index: int = 1
    flux: list[float] = Field(default_factory=lambda: [0.0, math.pi])
    k_min: float = -math.pi
    k_max: float = math.pi
    k_points: int = Field(33, ge=1)
    potential: Literal["zero", "cosine", "random_smooth"] = "zero"
    amplitude: float = 0.5
    seed: int = 0
    vector_potential: float = 0.0
    bands: list[int] = Field(default_factory=lambda: [0])
    coefficients: list[float] = Field(default_factory=lambda: [2**-0.5, 2**-0.5])
    levels: Optional[list[int]] = None
    radius: float = Field(1.0, gt=0)
    height: float = 0.5
    period: float = Field(20.0, gt=0)

    _lists = field_validator("flux", "bands", "coefficients", "levels", mode="before")(_split)

    @field_validator("bands")
    @classmethod
    def _bands(cls, v):
        if any(b < 0 for b in v):
            raise ValueError("bands must be non-negative")
        return v


class NumericsSection(_Section):
    n: int = Field(256, ge=8)
    dt: float = Field(1e-4, gt=0)
    steps: int = Field(1000, ge=2)
    delta: float = Field(1e-4, gt=0)
    tolerance: float = Field(1e-8, ge=MIN_TOLERANCE)
    samples: int = Field(16, ge=1)


class OutputSection(_Section):
    directory: str = "reports"
    format: Literal["csv", "json"] = "json"


class ScenarioConfig(_Section):
    scenario: ScenarioSection
    physics: PhysicsSection = Field(default_factory=PhysicsSection)
    numerics: NumericsSection = Field(default_factory=NumericsSection)
    output: OutputSection = Field(default_factory=OutputSection)

    def echo(self) -> dict:
        return self.model_dump(mode="json")


def _error(exc: ValidationError) -> ConfigError:
    err = exc.errors()[0]
    key = str(err["loc"][-1]) if err["loc"] else None
    where = ".".join(str(p) for p in err["loc"])
    return ConfigError(f"invalid config at {where}: {err['msg']}", key=key)


def parse_config(data: dict) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        raise _error(exc) from None


def parse_config_text(text: str) -> ScenarioConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case sensitive
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    return parse_config({name: dict(parser[name]) for name in parser.sections()})


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config_text(text)

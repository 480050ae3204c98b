"""Experiment configuration models and option parsing."""
import math
from typing import Any, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from optomech.src.config import DEFAULT_CUTOFF
from optomech.src.data_loader import read_json_file
from optomech.src.errors import ConfigError

OutputFormat = Literal["csv", "json"]
ModeChoice = Literal["constant", "composite", "both"]


class ExperimentConfig(BaseModel):
    """Everything a command needs besides the physical parameters themselves."""

    model_config = ConfigDict(extra="forbid")

    preset: Optional[str] = None
    params_file: Optional[str] = None
    params: dict[str, Union[float, str, None]] = Field(default_factory=dict)

    n_segments: list[int] = Field(default_factory=lambda: [3])
    phases: Union[Literal["optimal", "zero"], list[float]] = "optimal"
    reoptimize: bool = False
    timing: float = Field(default=1.0, gt=0)

    times: Optional[str] = None
    deviations: str = "-0.3:0.3:0.01"

    levels: list[float] = Field(default_factory=lambda: [1.0])
    mode: ModeChoice = "both"
    instances: int = Field(default=3000, ge=1)
    seed: Optional[int] = None
    save_instances: bool = False

    cutoff: int = Field(default=DEFAULT_CUTOFF, ge=1)
    noise_seed: Optional[int] = None
    thermal: bool = False

    width_fraction: Optional[float] = Field(default=None, gt=0)

    output: Optional[str] = None
    format: OutputFormat = "csv"


def load_config(path: Optional[str]) -> ExperimentConfig:
    if not path:
        return ExperimentConfig()
    return validate_config(read_json_file(path))


def validate_config(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        key = ".".join(str(part) for part in first["loc"]) or None
        raise ConfigError(f"invalid experiment config: {first['msg']}", key=key) from exc


def merge_options(config: ExperimentConfig, **options: Any) -> ExperimentConfig:
    """Command-line flags win over the config file; unset flags (None, empty) are ignored."""
    updates = {key: value for key, value in options.items() if value not in (None, (), [])}
    return validate_config({**config.model_dump(), **updates})


def parse_param_overrides(pairs: tuple[str, ...]) -> dict[str, Union[float, str]]:
    """KEY=VALUE pairs; numeric values become floats."""
    overrides: dict[str, Union[float, str]] = {}
    for pair in pairs:
        key, sep, raw = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"parameter override '{pair}' is not KEY=VALUE", key="param")
        raw = raw.strip()
        try:
            overrides[key.strip()] = float(raw)
        except ValueError:
            overrides[key.strip()] = raw
    return overrides


def parse_phases(raw: Optional[str]) -> Union[str, list[float], None]:
    """"optimal", "zero"/"0", or a comma-separated list of radians."""
    if raw is None:
        return None
    text = raw.strip().lower()
    if text in ("optimal", "zero"):
        return text
    if text == "0":
        return "zero"
    try:
        return [float(part) for part in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"cannot read phases '{raw}'", key="phases") from exc


def _parse_value(token: str, unit: Optional[float]) -> float:
    token = token.strip()
    scale = 1.0
    if token.endswith("tau"):
        if unit is None:
            raise ConfigError(f"'{token}': tau units are not available here")
        token, scale = token[:-3].strip() or "1", unit
    try:
        return float(token) * scale
    except ValueError as exc:
        raise ConfigError(f"cannot read value '{token}'") from exc


def parse_grid(text: str, unit: Optional[float] = None, key: str = "times") -> np.ndarray:
    """"start:stop:step" with an inclusive stop (step must divide the span), or a single value.

    A "tau" suffix scales a value by ``unit``.
    """
    parts = text.split(":")
    if len(parts) == 1:
        return np.array([_parse_value(parts[0], unit)])
    if len(parts) != 3:
        raise ConfigError(f"grid '{text}' must be start:stop:step", key=key)
    start, stop, step = (_parse_value(part, unit) for part in parts)
    if step <= 0 or stop < start:
        raise ConfigError(f"grid '{text}' needs a positive step and stop >= start", key=key)
    span = (stop - start) / step
    if not math.isclose(span, round(span), abs_tol=1e-6):
        raise ConfigError(f"grid '{text}': step does not divide stop - start", key=key)
    return np.linspace(start, stop, int(round(span)) + 1)


def require_seed(config: ExperimentConfig) -> int:
    if config.seed is None:
        raise ConfigError("stochastic commands need an explicit seed", key="seed")
    return config.seed

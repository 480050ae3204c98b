"""Parameter-set ingestion and validation."""
import json
from pathlib import Path
from typing import Any, Mapping, Optional, Union

from pydantic import ValidationError

from .config import PRESET_DIR
from .errors import ConfigError
from .model import SystemParams


def list_presets() -> list[str]:
    """Names of the bundled parameter sets."""
    return sorted(path.stem for path in PRESET_DIR.glob("*.json"))


def read_json_file(filepath: Union[str, Path]) -> dict:
    """Load a JSON key-value file, reporting syntax errors with their line."""
    path = Path(filepath)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path.name}: {exc.msg} at column {exc.colno}", line=exc.lineno) from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path.name} must contain a JSON object")
    return data


def params_from_mapping(data: Mapping[str, Any]) -> SystemParams:
    """Validate a mapping into SystemParams, naming the first offending key."""
    try:
        return SystemParams.model_validate(dict(data))
    except ValidationError as exc:
        first = exc.errors()[0]
        key = ".".join(str(part) for part in first["loc"]) or None
        raise ConfigError(f"invalid parameter set: {first['msg']}", key=key) from exc


def load_preset(name: str) -> SystemParams:
    path = PRESET_DIR / f"{name}.json"
    if not path.exists():
        raise ConfigError(f"unknown preset '{name}'; available: {', '.join(list_presets())}", key="preset")
    return params_from_mapping(read_json_file(path))


def load_params(
    preset: Optional[str] = None,
    params_file: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> SystemParams:
    """Resolve a preset or parameter file, then apply inline overrides on top."""
    if preset and params_file:
        raise ConfigError("give either a preset or a parameter file, not both", key="preset")
    if preset:
        base = load_preset(preset).model_dump(exclude_none=True)
    elif params_file:
        base = read_json_file(params_file)
    elif overrides:
        base = {}
    else:
        raise ConfigError("no parameter set given", key="preset")

    merged = {**base, **(overrides or {})}
    return params_from_mapping(merged)

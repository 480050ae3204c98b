import hashlib
import json
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from optomech.src import __version__

from .artifacts import sibling_path, write_json

TRACKED_LIBRARIES = ("numpy", "scipy", "pandas", "pydantic", "click")


def _library_versions() -> Dict[str, str]:
    versions = {"optomech": __version__}
    for name in TRACKED_LIBRARIES:
        try:
            versions[name] = version(name)
        except PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def config_hash(config: Dict[str, Any], params: Dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON of the resolved config and parameters."""
    canonical = json.dumps({"config": config, "params": params}, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_manifest(
    command: str,
    config: Dict[str, Any],
    params: Dict[str, Any],
    artifacts: Sequence[Path],
    seed: Optional[int] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    manifest = {
        "command": command,
        "config_hash": config_hash(config, params),
        "config": config,
        "params": params,
        "seed": seed,
        "versions": _library_versions(),
        "artifacts": [str(path) for path in artifacts],
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    if extra:
        manifest["summary"] = extra
    return manifest


def write_manifest(primary: Path, manifest: Dict[str, Any]) -> Path:
    return write_json(manifest, sibling_path(primary, "manifest.json"))

"""Options and run setup shared by every command."""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import click
import pandas as pd

from optomech.src.data_loader import load_params
from optomech.src.errors import ConfigError
from optomech.src.model import DerivedParams, SystemParams, derive
from optomech.src.optimizer import sequence_phases
from runner.schemas import ExperimentConfig, load_config, merge_options, parse_param_overrides
from runner.storage.artifacts import artifact_path, sibling_path, write_frame, write_json
from runner.storage.manifest import build_manifest, write_manifest


def common_options(fn):
    decorators = [
        click.option("--preset", default=None, help="Bundled parameter set (see `presets`)."),
        click.option("--params-file", default=None, type=click.Path(dir_okay=False),
                     help="JSON file with SystemParams fields."),
        click.option("--param", "param_pairs", multiple=True, help="Parameter override KEY=VALUE (repeatable)."),
        click.option("--config", "config_path", default=None, type=click.Path(dir_okay=False),
                     help="JSON experiment config; flags override its entries."),
        click.option("--output", default=None, help="Artifact path (default: $OPTOMECH_OUTPUT_DIR/<command>-<preset>)."),
        click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None, help="Artifact format."),
        click.option("--verbose", is_flag=True, default=False, help="Debug logging."),
    ]
    for decorator in reversed(decorators):
        fn = decorator(fn)
    return fn


@dataclass
class RunContext:
    command: str
    config: ExperimentConfig
    params: SystemParams
    derived: DerivedParams

    @property
    def label(self) -> str:
        return f"{self.command}-{self.params.name or 'custom'}"

    def emit(
        self,
        frame: pd.DataFrame,
        seed: Optional[int] = None,
        summary: Optional[Dict[str, Any]] = None,
        extra_frames: Optional[Dict[str, pd.DataFrame]] = None,
        document: Optional[Dict[str, Any]] = None,
    ) -> Path:
        """Write the main artifact (a table, or ``document`` as JSON) and its manifest."""
        fmt = self.config.format
        path = artifact_path(self.config.output, self.label, fmt)
        if document is not None and fmt == "json":
            write_json(document, path)
        else:
            write_frame(frame, path, fmt)
        written = [path]
        for suffix, extra in (extra_frames or {}).items():
            written.append(write_frame(extra, sibling_path(path, f"{suffix}.{fmt}"), fmt))

        manifest = build_manifest(
            self.command,
            self.config.model_dump(mode="json"),
            self.params.model_dump(mode="json", exclude_none=True),
            written,
            seed=seed,
            extra=summary,
        )
        write_manifest(path, manifest)
        for item in written:
            click.echo(f"✓ wrote {item}")
        return path


def prepare(
    command: str,
    *,
    preset: Optional[str],
    params_file: Optional[str],
    param_pairs: Sequence[str],
    config_path: Optional[str],
    output: Optional[str],
    fmt: Optional[str],
    verbose: bool,
    **options: Any,
) -> RunContext:
    """Resolve config file, flags and parameter set into a ready run."""
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    config = load_config(config_path)
    config = merge_options(config, preset=preset, params_file=params_file, output=output, format=fmt, **options)
    overrides = {**config.params, **parse_param_overrides(tuple(param_pairs))}
    config = merge_options(config, params=overrides)

    params = load_params(config.preset, config.params_file, config.params)
    return RunContext(command=command, config=config, params=params, derived=derive(params))


def resolve_phases(config: ExperimentConfig, n_segments: int, derived: DerivedParams) -> tuple[float, ...]:
    if isinstance(config.phases, list):
        if not config.phases:
            raise ConfigError("phase list is empty", key="phases")
        return tuple(config.phases)
    if config.phases == "zero":
        return (0.0,) * n_segments
    return sequence_phases(n_segments, derived, reoptimize=config.reoptimize)


def single_n(config: ExperimentConfig) -> int:
    if isinstance(config.phases, list):
        return len(config.phases)
    return config.n_segments[0]

import json
import os
from pathlib import Path
from typing import Any, Optional

import pandas as pd

from optomech.src.config import CSV_FLOAT_FORMAT, DEFAULT_OUTPUT_DIR, OUTPUT_DIR_ENV


def output_dir() -> Path:
    """Default artifact directory, from OPTOMECH_OUTPUT_DIR or ./results."""
    return Path(os.getenv(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR))


def artifact_path(explicit: Optional[str], stem: str, fmt: str) -> Path:
    path = Path(explicit) if explicit else output_dir() / f"{stem}.{fmt}"
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def sibling_path(path: Path, suffix: str) -> Path:
    """``results/trace.csv`` -> ``results/trace.<suffix>``."""
    return path.with_name(f"{path.stem}.{suffix}")


def write_frame(frame: pd.DataFrame, path: Path, fmt: str) -> Path:
    if fmt == "csv":
        frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    else:
        write_json(frame.to_dict(orient="records"), path)
    return path


def write_json(data: Any, path: Path) -> Path:
    with open(path, "w") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")
    return path

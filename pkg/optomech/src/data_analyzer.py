"""Tabular views of results and the robustness table."""
from typing import Iterable, Sequence

import pandas as pd

from .config import DrivingMode
from .evolution import MeanNumbers
from .tracing_models import MonteCarloReport, RobustnessCurve

TRACE_COLUMNS = ["t", "photons", "phonons", "osc_photons", "noise_photons", "osc_phonons", "noise_phonons"]
LINDBLAD_COLUMNS = ["t", "Jx", "Jy", "Jz", "photons", "phonons", "trace", "leakage"]
CLASSICAL_COLUMNS = ["t", "phase", "intensity", "re_beta", "im_beta"]


def trace_frame(times: Sequence[float], numbers: Sequence[MeanNumbers]) -> pd.DataFrame:
    rows = [number.as_row(float(t)) for t, number in zip(times, numbers)]
    return pd.DataFrame(rows, columns=TRACE_COLUMNS)


def curve_frame(curves: Iterable[RobustnessCurve]) -> pd.DataFrame:
    """Long format: one row per (sequence, deviation)."""
    rows = [
        {"label": curve.label, "deviation": deviation, "phonons": phonons}
        for curve in curves
        for deviation, phonons in zip(curve.deviations, curve.phonons)
    ]
    return pd.DataFrame(rows, columns=["label", "deviation", "phonons"])


def sequence_frame(phases: Sequence[float]) -> pd.DataFrame:
    return pd.DataFrame({
        "N": len(phases),
        "index": range(1, len(phases) + 1),
        "phase": [float(phase) for phase in phases],
    })


def study_frame(reports: Iterable[MonteCarloReport]) -> pd.DataFrame:
    rows = [
        {"rel_std": r.rel_std, "mode": r.mode, "mean": r.sample_mean, "std": r.sample_std, "instances": r.instances}
        for r in reports
    ]
    return pd.DataFrame(rows, columns=["rel_std", "mode", "mean", "std", "instances"])


def instances_frame(reports: Iterable[MonteCarloReport]) -> pd.DataFrame:
    rows = [
        {"rel_std": r.rel_std, "mode": r.mode, "instance": i, "phonons": value}
        for r in reports
        for i, value in enumerate(r.values)
    ]
    return pd.DataFrame(rows, columns=["rel_std", "mode", "instance", "phonons"])


def rows_frame(rows: Sequence[dict], columns: Sequence[str]) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=list(columns))


def generate_robustness_table(reports: Sequence[MonteCarloReport]) -> dict:
    """Group study reports by variation level and flag where composite driving has the smaller spread."""
    frame = study_frame(reports)
    table = {"levels": {}}
    for level, group in frame.groupby("rel_std", sort=True):
        by_mode = {row["mode"]: {"mean": row["mean"], "std": row["std"], "instances": int(row["instances"])}
                   for _, row in group.iterrows()}
        entry = {"modes": by_mode}
        if DrivingMode.CONSTANT in by_mode and DrivingMode.COMPOSITE in by_mode:
            entry["composite_more_robust"] = bool(
                by_mode[DrivingMode.COMPOSITE]["std"] < by_mode[DrivingMode.CONSTANT]["std"]
            )
        table["levels"][f"{level:g}"] = entry

    return table

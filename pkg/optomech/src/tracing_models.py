"""Structured result records.

These dataclasses are what the optimizer, the Monte Carlo study and the
classical integrator hand back. Each serializes to plain dicts so the same
object feeds the CLI artifacts and the Opik span metadata.

Usage:
    report = run_study(...)
    update_current_span(metadata=report.to_metadata())
"""
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np


@dataclass
class OptimizationResult:
    """Outcome of a derivative-nulling phase search."""
    n_segments: int
    phases: List[float]
    loss_asymmetry: float
    residual: float
    starts_tried: int = 1
    evaluations: int = 0
    converged: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_metadata(self) -> Dict[str, Any]:
        return {
            "optimizer": {
                "n_segments": self.n_segments,
                "loss_asymmetry": self.loss_asymmetry,
                "residual": self.residual,
                "starts_tried": self.starts_tried,
                "evaluations": self.evaluations,
                "converged": self.converged,
            }
        }


@dataclass
class RobustnessCurve:
    """Final phonon number against the area deviation for one sequence."""
    deviations: List[float]
    phonons: List[float]
    phases: List[float] = field(default_factory=list)
    label: str = ""

    def __post_init__(self):
        if len(self.deviations) != len(self.phonons):
            raise ValueError("deviations and phonons must have equal length")
        if any(b <= a for a, b in zip(self.deviations, self.deviations[1:])):
            raise ValueError("deviations must be strictly increasing")

    def value_at(self, deviation: float) -> float:
        return float(np.interp(deviation, self.deviations, self.phonons))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class MonteCarloReport:
    """Sample statistics of the final phonon number under rate fluctuations."""
    mode: str
    rel_std: float
    sample_mean: float
    sample_std: float
    instances: int
    seed: Optional[int] = None
    values: List[float] = field(default_factory=list, repr=False)

    @classmethod
    def from_values(cls, mode: str, rel_std: float, values: List[float],
                    seed: Optional[int] = None) -> "MonteCarloReport":
        mean, std = _sample_statistics(values)
        return cls(mode=mode, rel_std=rel_std, sample_mean=mean, sample_std=std,
                   instances=len(values), seed=seed, values=list(values))

    def recompute(self) -> "MonteCarloReport":
        """Statistics rebuilt from the stored per-instance values."""
        return MonteCarloReport.from_values(self.mode, self.rel_std, self.values, self.seed)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "rel_std": self.rel_std,
            "mean": self.sample_mean,
            "std": self.sample_std,
            "instances": self.instances,
            "seed": self.seed,
        }

    def to_metadata(self) -> Dict[str, Any]:
        return {"montecarlo": self.to_dict()}


def _sample_statistics(values: List[float]) -> tuple[float, float]:
    if not values:
        raise ValueError("a Monte Carlo report needs at least one instance")
    samples = np.asarray(values, dtype=float)
    mean = float(samples.mean())
    std = float(samples.std(ddof=1)) if samples.size > 1 else 0.0
    return mean, std


@dataclass
class DriftMetrics:
    """Deviations of the classical amplitudes from their steady state, in percent."""
    amplitude_excursion: float
    area_change: float
    omega_area_change: float
    max_segment_area_change: float
    detuning_drift: float
    return_residual: float

    def __post_init__(self):
        for name, value in asdict(self).items():
            if math.isnan(value) or value < 0:
                raise ValueError(f"drift metric {name} must be non-negative, got {value}")

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)

"""Robustness of the transfer under random fluctuations of g, kappa and gamma."""
import logging
from typing import Iterable, Optional, Union

import numpy as np

from .config import MAX_RESAMPLES, TABLE_INSTANCES, TABLE_LEVELS, DrivingMode
from .errors import ConfigError, SamplingError
from .evolution import PhaseSequence, phonons_at_end
from .model import DerivedParams, SystemParams, check_red_detuned
from .optimizer import optimal_phase
from .tracing import log_study_summary, maybe_track
from .tracing_models import MonteCarloReport

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator, None]


def _generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_params(central: DerivedParams, rel_std: float, seed: SeedLike = None) -> DerivedParams:
    """Multiply g, kappa, gamma by independent N(1, rel_std %) draws.

    The swap time (and so the driving schedule) stays at its central value.
    Draws with a non-positive rate or Gamma^2 >= 1 are redrawn.
    """
    if rel_std < 0:
        raise ConfigError("relative standard deviation must be non-negative", key="rel_std")
    if rel_std == 0:
        return central

    rng = _generator(seed)
    scale = rel_std / 100
    for _ in range(MAX_RESAMPLES):
        g_factor, kappa_factor, gamma_factor = rng.normal(1.0, scale, size=3)
        coupling = central.enhanced_coupling * g_factor
        kappa = central.cavity_decay * kappa_factor
        gamma = central.mech_decay * gamma_factor
        if coupling <= 0 or kappa <= 0 or gamma <= 0 or ((kappa - gamma) / (4 * coupling)) ** 2 >= 1:
            logger.debug("rejected draw g=%.4g kappa=%.4g gamma=%.4g; resampling", coupling, kappa, gamma)
            continue
        return central.with_rates(coupling, kappa, gamma)
    raise SamplingError(f"no valid parameter draw in {MAX_RESAMPLES} attempts at {rel_std}% variation")


def study_sequence(central: DerivedParams, mode: str) -> PhaseSequence:
    """Three swap times of driving: constant phase, or (0, phi_opt, 0)."""
    check_red_detuned(central)
    if mode == DrivingMode.CONSTANT:
        return PhaseSequence.constant(3 * central.swap_time)
    if mode == DrivingMode.COMPOSITE:
        phase = optimal_phase(central.loss_asymmetry)
        return PhaseSequence.from_phases((0.0, phase, 0.0), central.swap_time, symmetric=True)
    raise ConfigError(f"unknown driving mode '{mode}'", key="mode")


@maybe_track(name="run_study")
def run_study(
    central: DerivedParams,
    params: SystemParams,
    mode: str,
    rel_std: float,
    n_instances: int,
    seed: Optional[int] = None,
) -> MonteCarloReport:
    """Final phonon number statistics over ``n_instances`` perturbed parameter sets.

    Instance i draws from the i-th child of SeedSequence(seed), so results do
    not depend on execution order.
    """
    if n_instances < 1:
        raise ConfigError("a study needs at least one instance", key="instances")
    sequence = study_sequence(central, mode)
    streams = np.random.SeedSequence(seed).spawn(n_instances)
    values = [
        phonons_at_end(sequence, sample_params(central, rel_std, np.random.default_rng(stream)), params)
        for stream in streams
    ]
    report = MonteCarloReport.from_values(mode, rel_std, values, seed)
    logger.info("%s driving at %.3g%%: mean %.6g, std %.3g over %d instances",
                mode, rel_std, report.sample_mean, report.sample_std, n_instances)
    log_study_summary(report)
    return report


def sweep_levels(
    central: DerivedParams,
    params: SystemParams,
    levels: Iterable[float] = TABLE_LEVELS,
    modes: Iterable[str] = DrivingMode.ALL,
    n_instances: int = TABLE_INSTANCES,
    seed: Optional[int] = None,
) -> list[MonteCarloReport]:
    """One report per (level, mode), levels outermost."""
    modes = tuple(modes)
    return [
        run_study(central, params, mode, level, n_instances, seed)
        for level in levels
        for mode in modes
    ]

"""Classical amplitude dynamics under smooth (erf-shaped) phase profiles."""
import cmath
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq
from scipy.special import erf

from .config import (
    CALIBRATION_BRACKET,
    CALIBRATION_XTOL,
    CLASSICAL_ATOL,
    CLASSICAL_RTOL,
    CLASSICAL_SAMPLES_PER_SEGMENT,
    FALL_FRACTION,
    FIXED_POINT_ITERATIONS,
    FIXED_POINT_MIXING,
    OVERLAP_LIMIT,
    RISE_FRACTION,
    SMOOTH_WIDTH_FRACTION,
)
from .errors import CalibrationError, ConfigError, FixedPointError, IntegratorError, ProfileOverlapError, SequenceError
from .model import DerivedParams, SystemParams, drive_amplitude, resolve_laser_detuning
from .optimizer import lossless_phases, optimal_phase, wrap_phase
from .tracing import log_drift_metrics, maybe_track
from .tracing_models import DriftMetrics

logger = logging.getLogger(__name__)


def _step(x):
    """theta_s(x) = (erf(x) + 1) / 2."""
    return 0.5 * (erf(x) + 1.0)


# PROFILE --------------------------------------------------------------------

@dataclass(frozen=True)
class SmoothProfile:
    """phi(t) = sum_k a_k theta_s((t - rise_k)/sigma) theta_s((fall_k - t)/sigma).

    Bump heights a_k start as f * target_k and are balanced so every segment
    average matches its target. Zero-target segments get a small bump that
    cancels the tails of their neighbours.
    """

    targets: tuple[float, ...]
    width: float
    segment_duration: float
    factor: float = 1.0
    heights: Optional[tuple[float, ...]] = None
    rise: float = RISE_FRACTION
    fall: float = FALL_FRACTION

    def __post_init__(self):
        if not self.width > 0:
            raise ConfigError("smoothing width must be positive", key="width")
        if not self.segment_duration > 0:
            raise SequenceError("segment duration must be positive")
        if not 0 <= self.rise < self.fall <= 1:
            raise SequenceError("transition fractions must satisfy 0 <= rise < fall <= 1")

    @property
    def n_segments(self) -> int:
        return len(self.targets)

    @property
    def total_duration(self) -> float:
        return self.n_segments * self.segment_duration

    @property
    def amplitudes(self) -> tuple[float, ...]:
        if self.heights is not None:
            return self.heights
        return tuple(self.factor * target for target in self.targets)

    def transitions(self, index: int) -> tuple[float, float]:
        start = index * self.segment_duration
        return start + self.rise * self.segment_duration, start + self.fall * self.segment_duration

    def bump(self, index: int, t):
        rise, fall = self.transitions(index)
        return _step((np.asarray(t) - rise) / self.width) * _step((fall - np.asarray(t)) / self.width)

    def phase(self, t):
        """phi(t); accepts scalars or arrays."""
        t = np.asarray(t, dtype=float)
        total = np.zeros_like(t)
        for index, amplitude in enumerate(self.amplitudes):
            if amplitude != 0.0:
                total = total + amplitude * self.bump(index, t)
        return total if total.ndim else float(total)

    def scalar_phase(self, t: float) -> float:
        total = 0.0
        for index, amplitude in enumerate(self.amplitudes):
            if amplitude != 0.0:
                rise, fall = self.transitions(index)
                total += amplitude * 0.25 * (math.erf((t - rise) / self.width) + 1.0) \
                    * (math.erf((fall - t) / self.width) + 1.0)
        return total

    def overlap(self) -> float:
        """Largest product of neighbouring unit bumps at their shared boundary."""
        worst = 0.0
        for index in range(self.n_segments - 1):
            boundary = (index + 1) * self.segment_duration
            worst = max(worst, float(self.bump(index, boundary) * self.bump(index + 1, boundary)))
        return worst


def _bump_average(profile: SmoothProfile, bump_index: int, segment_index: int) -> float:
    """Mean of the unit bump ``bump_index`` over segment ``segment_index``."""
    start = segment_index * profile.segment_duration
    end = start + profile.segment_duration
    points = [t for t in profile.transitions(bump_index) if start < t < end]
    value, _ = quad(lambda t: float(profile.bump(bump_index, t)), start, end,
                    points=points or None, limit=200)
    return value / profile.segment_duration


def segment_averages(profile: SmoothProfile) -> list[float]:
    """Time average of phi(t) over each segment."""
    averages = []
    for segment in range(profile.n_segments):
        start = segment * profile.segment_duration
        end = start + profile.segment_duration
        points = [t for k in range(profile.n_segments) for t in profile.transitions(k) if start < t < end]
        value, _ = quad(profile.scalar_phase, start, end, points=points or None, limit=200)
        averages.append(value / profile.segment_duration)
    return averages


def calibrate_f(profile: SmoothProfile, target: Optional[float] = None) -> float:
    """Scale f so the first segment with a nonzero target averages to that target."""
    nonzero = [index for index, phase in enumerate(profile.targets) if phase != 0.0]
    if not nonzero:
        return 1.0
    index = nonzero[0]
    target = profile.targets[index] if target is None else target
    unit = replace(profile, factor=1.0, heights=None)

    def mismatch(factor: float) -> float:
        return factor * _bump_average(unit, index, index) * unit.targets[index] \
            + sum(factor * unit.targets[k] * _bump_average(unit, k, index)
                  for k in nonzero if k != index and abs(k - index) == 1) - target

    low, high = CALIBRATION_BRACKET
    try:
        return brentq(mismatch, low, high, xtol=CALIBRATION_XTOL)
    except ValueError as exc:
        raise CalibrationError(f"no amplitude factor in ({low}, {high}] reaches the target {target:.4g}") from exc


def _balance(profile: SmoothProfile) -> tuple[float, ...]:
    """Bump heights giving every segment, zero targets included, exactly its target average."""
    if not any(profile.targets):
        return (0.0,) * profile.n_segments
    segments = range(profile.n_segments)
    matrix = np.array([[_bump_average(profile, bump, segment) for bump in segments] for segment in segments])
    solved = np.linalg.solve(matrix, np.array(profile.targets))
    return tuple(float(value) for value in solved)


def smooth_profile(avg_phases: Sequence[float], derived: DerivedParams, width: Optional[float] = None,
                   rise: float = RISE_FRACTION, fall: float = FALL_FRACTION) -> SmoothProfile:
    """Calibrated profile for segments of one swap time; width defaults to 0.15 tau0."""
    targets = tuple(wrap_phase(float(phase)) for phase in avg_phases)
    if len(targets) % 2 == 0:
        raise SequenceError("smooth profiles need an odd number of segments")
    if abs(targets[0]) > 1e-12 or abs(targets[-1]) > 1e-12:
        raise SequenceError("smooth profiles start and end with zero phase")
    targets = (0.0,) + targets[1:-1] + (0.0,) if len(targets) > 1 else (0.0,)
    width = SMOOTH_WIDTH_FRACTION * derived.swap_time if width is None else width

    profile = SmoothProfile(targets=targets, width=width, segment_duration=derived.swap_time,
                            rise=rise, fall=fall)
    overlap = profile.overlap()
    if overlap > OVERLAP_LIMIT:
        raise ProfileOverlapError(f"neighbouring bumps overlap at {overlap:.2e} (limit {OVERLAP_LIMIT:.0e})")

    factor = calibrate_f(profile)
    profile = replace(profile, factor=factor)
    return replace(profile, heights=_balance(profile))


def default_targets(n_segments: int, derived: DerivedParams) -> tuple[float, ...]:
    """Negative-branch averages: (0, -phi_opt, 0) for three segments, the lossless set otherwise."""
    if n_segments == 3:
        return (0.0, -optimal_phase(derived.loss_asymmetry), 0.0)
    return lossless_phases(n_segments)


# DYNAMICS -------------------------------------------------------------------

def steady_amplitudes(params: SystemParams) -> tuple[complex, complex]:
    """Fixed point of the amplitude equations with the full g0 alpha (beta + beta*) term."""
    laser = resolve_laser_detuning(params)
    half_drive = drive_amplitude(params) / 2
    g0, kappa, gamma, omega = params.bare_coupling, params.cavity_decay, params.mech_decay, params.mech_freq

    beta = 0j
    alpha = half_drive / (kappa / 2 + 1j * laser)
    for _ in range(FIXED_POINT_ITERATIONS):
        target_beta = -1j * g0 * abs(alpha) ** 2 / (gamma / 2 + 1j * omega)
        beta_next = (1 - FIXED_POINT_MIXING) * beta + FIXED_POINT_MIXING * target_beta
        alpha_next = half_drive / (kappa / 2 + 1j * (laser + 2 * g0 * beta_next.real))
        converged = abs(alpha_next - alpha) <= 1e-14 * abs(alpha_next) and abs(beta_next - beta) <= 1e-14 * max(abs(beta_next), 1e-300)
        alpha, beta = alpha_next, beta_next
        if converged:
            return alpha, beta
    raise FixedPointError("amplitude fixed point did not converge")


@dataclass
class ClassicalTrajectory:
    times: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    phase: np.ndarray
    steady_alpha: complex
    steady_beta: complex
    metrics: DriftMetrics
    segment_areas: list[float] = field(default_factory=list)

    @property
    def intensity(self) -> np.ndarray:
        """|alpha|^2 normalized by its steady-state value."""
        return np.abs(self.alpha) ** 2 / abs(self.steady_alpha) ** 2

    def to_rows(self) -> list[dict]:
        intensity = self.intensity
        return [
            {
                "t": float(t),
                "phase": float(self.phase[i]),
                "intensity": float(intensity[i]),
                "re_beta": float(self.beta[i].real),
                "im_beta": float(self.beta[i].imag),
            }
            for i, t in enumerate(self.times)
        ]


def _percent(value: float, reference: float) -> float:
    return 100.0 * abs(value) / abs(reference)


@maybe_track(name="integrate_classical")
def integrate_classical(params: SystemParams, profile: SmoothProfile,
                        t_end: Optional[float] = None,
                        samples_per_segment: int = CLASSICAL_SAMPLES_PER_SEGMENT) -> ClassicalTrajectory:
    """Integrate alpha, beta from their fixed point while the laser phase follows the profile."""
    alpha0, beta0 = steady_amplitudes(params)
    laser = resolve_laser_detuning(params)
    half_drive = drive_amplitude(params) / 2
    g0, kappa, gamma, omega = params.bare_coupling, params.cavity_decay, params.mech_decay, params.mech_freq
    asymmetry_scale = (kappa - gamma) / (4 * g0)

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        alpha = complex(y[0], y[1])
        beta = complex(y[2], y[3])
        drive = half_drive * cmath.exp(1j * profile.scalar_phase(t))
        d_alpha = -(kappa / 2 + 1j * laser) * alpha - 2j * g0 * beta.real * alpha + drive
        d_beta = -(gamma / 2 + 1j * omega) * beta - 1j * g0 * abs(alpha) ** 2
        coupling = g0 * abs(alpha)
        loss = asymmetry_scale / abs(alpha)
        rabi = math.sqrt(max(0.0, 1.0 - loss ** 2))
        return np.array([d_alpha.real, d_alpha.imag, d_beta.real, d_beta.imag, coupling, coupling * rabi])

    t_end = profile.total_duration if t_end is None else t_end
    if t_end <= 0:
        raise SequenceError("classical integration needs a positive end time")
    n_points = max(2, int(round(samples_per_segment * t_end / profile.segment_duration)) + 1)
    t_eval = np.linspace(0.0, t_end, n_points)
    boundaries = [k * profile.segment_duration for k in range(profile.n_segments + 1)
                  if k * profile.segment_duration <= t_end]
    t_eval = np.unique(np.concatenate([t_eval, boundaries]))

    solution = solve_ivp(
        rhs,
        (0.0, t_end),
        np.array([alpha0.real, alpha0.imag, beta0.real, beta0.imag, 0.0, 0.0]),
        method="DOP853",
        t_eval=t_eval,
        rtol=CLASSICAL_RTOL,
        atol=CLASSICAL_ATOL,
        max_step=profile.width / 4,
    )
    if not solution.success:
        raise IntegratorError(f"amplitude integration failed: {solution.message}")

    alpha = solution.y[0] + 1j * solution.y[1]
    beta = solution.y[2] + 1j * solution.y[3]
    area_g, area_omega = solution.y[4], solution.y[5]

    coupling0 = g0 * abs(alpha0)
    loss0 = asymmetry_scale / abs(alpha0)
    rabi0 = math.sqrt(max(0.0, 1.0 - loss0 ** 2))
    detuning = -laser - 2 * g0 * beta.real
    detuning0 = -laser - 2 * g0 * beta0.real

    segment_areas = []
    for start, end in zip(boundaries, boundaries[1:]):
        i0, i1 = np.searchsorted(solution.t, [start, end])
        segment_areas.append(float(area_g[i1] - area_g[i0]))
    ideal_segment = coupling0 * profile.segment_duration

    metrics = DriftMetrics(
        amplitude_excursion=100.0 * float(np.max(np.abs(np.abs(alpha) - abs(alpha0)))) / abs(alpha0),
        area_change=_percent(area_g[-1] - coupling0 * t_end, coupling0 * t_end),
        omega_area_change=_percent(area_omega[-1] - coupling0 * rabi0 * t_end, coupling0 * rabi0 * t_end)
        if rabi0 > 0 else 0.0,
        max_segment_area_change=max((_percent(a - ideal_segment, ideal_segment) for a in segment_areas),
                                    default=0.0),
        detuning_drift=100.0 * float(np.max(np.abs(detuning - detuning0))) / abs(detuning0),
        return_residual=_percent(abs(alpha[-1] - alpha0), abs(alpha0)),
    )
    logger.info("classical run: |alpha| excursion %.3g%%, area change %.3g%%, detuning drift %.2g%%",
                metrics.amplitude_excursion, metrics.area_change, metrics.detuning_drift)
    log_drift_metrics(metrics)

    return ClassicalTrajectory(
        times=solution.t,
        alpha=alpha,
        beta=beta,
        phase=profile.phase(solution.t),
        steady_alpha=alpha0,
        steady_beta=beta0,
        metrics=metrics,
        segment_areas=segment_areas,
    )

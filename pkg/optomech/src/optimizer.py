"""Optimal composite phases and robustness scans.

Every segment accumulates the area pi/2 + delta at fixed Gamma, so each
segment matrix is cos(a) 1 - i sin(a)/Omega H with a = pi/2 + delta and its
Taylor series in delta is known exactly. The series of the composite
element U22^(N) follows from polynomial products. For palindromic phase
vectors U22^(N) is real, and the solver nulls its first (N - 1)/2 Taylor
coefficients; |U22^(N)|^2, the dominant part of the final phonon number,
is then flat to twice that order.
"""
import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from .config import (
    FD_BASE_STEP,
    OPTIMIZER_MAX_EVALUATIONS,
    OPTIMIZER_SEED,
    OPTIMIZER_STARTS,
    OPTIMIZER_TOLERANCE,
    SWAP_AREA,
)
from .errors import ConvergenceError, NoRealSolutionError, OverdampedRegimeError, SequenceError
from .evolution import PhaseSequence, generator, phonons_at_end, propagator_for_area, symmetric_phases
from .model import DerivedParams, SystemParams, apply_area_deviation
from .tracing import log_optimizer_result, maybe_track
from .tracing_models import OptimizationResult, RobustnessCurve

logger = logging.getLogger(__name__)

# d^n/da^n of cos(a) and sin(a) at a = pi/2, cycling with period 4
_COS_DERIVATIVES = (0.0, -1.0, 0.0, 1.0)
_SIN_DERIVATIVES = (1.0, 0.0, -1.0, 0.0)


def wrap_phase(phase: float) -> float:
    """Map a phase into (-pi, pi]."""
    wrapped = math.pi - math.fmod(math.pi - phase, 2 * math.pi)
    if wrapped > math.pi:
        wrapped -= 2 * math.pi
    if wrapped <= -math.pi:
        wrapped += 2 * math.pi
    return wrapped


# CLOSED FORM ----------------------------------------------------------------

def optimal_phase(loss_asymmetry: float) -> float:
    """arccos((3 Gamma^2 - 1) / 2) in (0, pi]; the negative value is equally optimal."""
    cosine = (3 * loss_asymmetry ** 2 - 1) / 2
    if abs(cosine) > 1 + 1e-12:
        raise NoRealSolutionError(
            f"no real optimal phase for Gamma = {loss_asymmetry:.4g} (needs Gamma^2 <= 1)"
        )
    return math.acos(min(1.0, max(-1.0, cosine)))


def optimal_phase_pair(loss_asymmetry: float) -> tuple[float, float]:
    phase = optimal_phase(loss_asymmetry)
    return phase, -phase


def lossless_phases(n_segments: int) -> tuple[float, ...]:
    """Symmetric family -pi (N-1) k (k-1) / (2N), k = 1..N, wrapped into (-pi, pi]."""
    _check_odd(n_segments)
    phases = []
    for k in range(1, n_segments + 1):
        raw = -math.pi * (n_segments - 1) * k * (k - 1) / (2 * n_segments)
        phases.append(wrap_phase(raw) if k not in (1, n_segments) else 0.0)
    return tuple(phases)


def _check_odd(n_segments: int) -> None:
    if n_segments < 1 or n_segments % 2 == 0:
        raise SequenceError(f"composite sequences need an odd number of segments, got {n_segments}")


# FLATNESS OBJECTIVE ---------------------------------------------------------

def _segment_series(phase: float, loss_asymmetry: float, order: int) -> np.ndarray:
    """Taylor coefficients in delta of one segment matrix, shape (order + 1, 2, 2)."""
    rabi = math.sqrt(1.0 - loss_asymmetry ** 2)
    h = generator(phase, loss_asymmetry)
    identity = np.eye(2, dtype=complex)
    series = np.empty((order + 1, 2, 2), dtype=complex)
    for n in range(order + 1):
        cos_n, sin_n = _COS_DERIVATIVES[n % 4], _SIN_DERIVATIVES[n % 4]
        series[n] = (cos_n * identity - 1j * sin_n / rabi * h) / math.factorial(n)
    return series


def _series_matmul(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    order = left.shape[0] - 1
    product = np.zeros_like(left)
    for n in range(order + 1):
        for i in range(n + 1):
            product[n] += left[i] @ right[n - i]
    return product


def transfer_coefficients(phases: Sequence[float], loss_asymmetry: float, order: int) -> np.ndarray:
    """Taylor coefficients of U22^(N) in the area deviation, orders 0..order."""
    if loss_asymmetry ** 2 >= 1:
        raise OverdampedRegimeError("flatness is defined only for Gamma^2 < 1")
    total = None
    for phase in phases:
        segment = _segment_series(phase, loss_asymmetry, order)
        # later segments act from the left
        total = segment if total is None else _series_matmul(segment, total)
    return total[:, 1, 1]


def flatness_coefficients(phases: Sequence[float], loss_asymmetry: float, order: int) -> np.ndarray:
    """Taylor coefficients F_0..F_order of |U22^(N)|^2 in the area deviation."""
    u22 = transfer_coefficients(phases, loss_asymmetry, order)
    return np.array([
        float(np.real(sum(u22[i] * np.conj(u22[n - i]) for i in range(n + 1))))
        for n in range(order + 1)
    ])


def area_sensitivity(phases: Sequence[float], loss_asymmetry: float, step: float = 1e-4) -> float:
    """Central difference of |U22^(N)|^2 with respect to the area deviation, at fixed Gamma."""
    def transfer(deviation: float) -> float:
        area = SWAP_AREA + deviation
        matrix = np.eye(2, dtype=complex)
        for phase in phases:
            matrix = propagator_for_area(phase, area, loss_asymmetry).as_array() @ matrix
        return abs(matrix[1, 1]) ** 2

    return (transfer(step) - transfer(-step)) / (2 * step)


def finite_difference_derivative(phases: Sequence[float], loss_asymmetry: float, order: int,
                                 step: Optional[float] = None) -> float:
    """order-th derivative of |U22^(N)|^2 by a central stencil; used to cross-check the series."""
    half = (order + 1) // 2 + 1
    step = step if step is not None else FD_BASE_STEP * 10 ** ((order - 1) / 2)
    offsets = np.arange(-half, half + 1)
    vandermonde = np.vander(offsets, increasing=True).T.astype(float)
    rhs = np.zeros(len(offsets))
    rhs[order] = math.factorial(order)
    weights = np.linalg.solve(vandermonde, rhs)

    values = []
    for offset in offsets:
        area = SWAP_AREA + offset * step
        matrix = np.eye(2, dtype=complex)
        for phase in phases:
            matrix = propagator_for_area(phase, area, loss_asymmetry).as_array() @ matrix
        values.append(abs(matrix[1, 1]) ** 2)
    return float(np.dot(weights, values) / step ** order)


# NUMERICAL OPTIMIZATION -----------------------------------------------------

def _normalize(free: Sequence[float]) -> tuple[float, ...]:
    wrapped = [wrap_phase(phase) for phase in free]
    if wrapped and wrapped[0] <= 0:
        wrapped = [wrap_phase(-phase) for phase in wrapped]
    return tuple(wrapped)


def _starts(n_free: int, seed_free: Sequence[float]):
    yield np.asarray(seed_free, dtype=float)
    yield -np.asarray(seed_free, dtype=float)
    rng = np.random.default_rng(OPTIMIZER_SEED)
    for _ in range(max(0, OPTIMIZER_STARTS - 2)):
        yield np.asarray(seed_free, dtype=float) + rng.normal(0.0, 0.5, size=n_free)


@maybe_track(name="find_sequence")
def find_sequence(n_segments: int, loss_asymmetry: float) -> OptimizationResult:
    """Symmetric phases nulling the first (N - 1)/2 area derivatives of the transfer."""
    _check_odd(n_segments)
    if n_segments == 1:
        return OptimizationResult(n_segments=1, phases=[0.0], loss_asymmetry=loss_asymmetry, residual=0.0)
    if loss_asymmetry ** 2 >= 1:
        raise OverdampedRegimeError(f"|Gamma| = {abs(loss_asymmetry):.4g} >= 1: no swap to make robust")

    n_free = (n_segments - 1) // 2
    order = n_free

    def residuals(free: np.ndarray) -> np.ndarray:
        coefficients = transfer_coefficients(symmetric_phases(free), loss_asymmetry, order)[1:]
        return np.concatenate([coefficients.real, coefficients.imag])

    seed_free = lossless_phases(n_segments)[1:n_free + 1]
    best_residual, evaluations = math.inf, 0
    for attempt, start in enumerate(_starts(n_free, seed_free), start=1):
        solution = least_squares(
            residuals, start, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
            max_nfev=OPTIMIZER_MAX_EVALUATIONS,
        )
        evaluations += solution.nfev
        residual = float(np.max(np.abs(residuals(solution.x))))
        best_residual = min(best_residual, residual)
        if residual <= OPTIMIZER_TOLERANCE:
            phases = symmetric_phases(_normalize(solution.x))
            result = OptimizationResult(
                n_segments=n_segments,
                phases=list(phases),
                loss_asymmetry=loss_asymmetry,
                residual=residual,
                starts_tried=attempt,
                evaluations=evaluations,
            )
            logger.debug("N=%d Gamma=%.6g converged after %d start(s), residual %.2e",
                         n_segments, loss_asymmetry, attempt, residual)
            log_optimizer_result(result)
            return result
        logger.info("start %d for N=%d ended at residual %.2e; restarting", attempt, n_segments, residual)

    raise ConvergenceError(f"no flat {n_segments}-segment sequence found for Gamma = {loss_asymmetry:.6g}",
                           best_residual)


def optimize_sequence(n_segments: int, derived: DerivedParams) -> tuple[float, ...]:
    """Symmetric phase vector (0, phi_2, ..., phi_2, 0) for the given parameters."""
    return tuple(find_sequence(n_segments, derived.loss_asymmetry).phases)


def sequence_phases(n_segments: int, derived: DerivedParams, reoptimize: bool = False) -> tuple[float, ...]:
    """Phases used for an "optimal" N-segment sequence.

    N = 3 uses the closed-form phase. Longer sequences use the lossless
    family unless ``reoptimize`` asks for the numerical search at this Gamma.
    """
    _check_odd(n_segments)
    if n_segments == 1:
        return (0.0,)
    if reoptimize:
        return optimize_sequence(n_segments, derived)
    if n_segments == 3:
        return (0.0, optimal_phase(derived.loss_asymmetry), 0.0)
    return symmetric_phases(_normalize(lossless_phases(n_segments)[1:(n_segments + 1) // 2]))


# ROBUSTNESS -----------------------------------------------------------------

def robustness_scan(seq: PhaseSequence, deviations: Sequence[float], derived: DerivedParams,
                    params: SystemParams, label: str = "") -> RobustnessCurve:
    """Phonon number at the end of ``seq`` for each area deviation."""
    grid = [float(deviation) for deviation in deviations]
    if any(later <= earlier for earlier, later in zip(grid, grid[1:])):
        raise SequenceError("area deviations must be strictly increasing")
    phonons = [phonons_at_end(seq, apply_area_deviation(derived, deviation), params) for deviation in grid]
    return RobustnessCurve(deviations=grid, phonons=phonons, phases=list(seq.phases), label=label)


def half_width(curve: RobustnessCurve, fraction: float = 0.1) -> float:
    """Distance from zero deviation to the nearest point where the phonon number
    leaves the band n(0) (1 +- fraction), linearly interpolated."""
    deviations = np.asarray(curve.deviations)
    phonons = np.asarray(curve.phonons)
    if not deviations[0] <= 0 <= deviations[-1]:
        raise SequenceError("half-width needs a deviation grid that contains zero")
    center = curve.value_at(0.0)
    excess = np.abs(phonons - center) - fraction * abs(center)

    def edge(indices) -> float:
        previous = None
        for index in indices:
            if excess[index] > 0:
                if previous is None:
                    return abs(deviations[index])
                x0, x1 = deviations[previous], deviations[index]
                e0, e1 = excess[previous], excess[index]
                return abs(x0 + (x1 - x0) * (-e0) / (e1 - e0))
            previous = index
        return abs(deviations[indices[-1]])

    right = [i for i in range(len(deviations)) if deviations[i] >= 0]
    left = [i for i in reversed(range(len(deviations))) if deviations[i] <= 0]
    return float(min(edge(right), edge(left)))

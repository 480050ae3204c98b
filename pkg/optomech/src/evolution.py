"""Propagators, thermal-noise integrals and mean occupation numbers.

The fluctuation vector (c, d) evolves as exp(-mu t) U(t) in the frame that
removes the mean decay, with

    U = cos(Omega g tau) 1 - (i / Omega) sin(Omega g tau) H,
    H = [[-i Gamma, exp(i phi)], [exp(-i phi), i Gamma]].

For Gamma^2 > 1 the same expressions are evaluated with an imaginary Omega,
which turns cos/sin into cosh/sinh.
"""
import cmath
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from .config import DEGENERATE_RABI, DETUNING_TOLERANCE, NOISE_QUAD_LIMIT, NOISE_QUAD_RTOL
from .errors import NumericalAccuracyError, OutOfRangeError, OverdampedRegimeError, SequenceError
from .model import DerivedParams, SystemParams, check_red_detuned

logger = logging.getLogger(__name__)

_IDENTITY = np.eye(2, dtype=complex)


# TYPES ----------------------------------------------------------------------

@dataclass(frozen=True)
class TransferMatrix:
    """2x2 propagator in the frame without the mean decay."""

    u11: complex
    u12: complex
    u21: complex
    u22: complex

    @classmethod
    def from_array(cls, matrix: np.ndarray) -> "TransferMatrix":
        return cls(complex(matrix[0, 0]), complex(matrix[0, 1]), complex(matrix[1, 0]), complex(matrix[1, 1]))

    @classmethod
    def identity(cls) -> "TransferMatrix":
        return cls(1 + 0j, 0j, 0j, 1 + 0j)

    def as_array(self) -> np.ndarray:
        return np.array([[self.u11, self.u12], [self.u21, self.u22]], dtype=complex)

    def element(self, row: int, col: int) -> complex:
        """U_jk with 1-based indices, as written in the formulas."""
        return self.as_array()[row - 1, col - 1]

    def det(self) -> complex:
        return self.u11 * self.u22 - self.u12 * self.u21

    def __matmul__(self, other: "TransferMatrix") -> "TransferMatrix":
        return TransferMatrix.from_array(self.as_array() @ other.as_array())


@dataclass(frozen=True)
class Segment:
    phase: float
    duration: float


@dataclass(frozen=True)
class PhaseSequence:
    """Ordered constant-phase segments; the first segment acts first."""

    segments: tuple[Segment, ...]
    symmetric: bool = False

    def __post_init__(self):
        if not self.segments:
            raise SequenceError("a phase sequence needs at least one segment")
        for index, segment in enumerate(self.segments):
            if not segment.duration > 0:
                raise SequenceError(f"segment {index} has non-positive duration {segment.duration}")
        if self.symmetric:
            phases = self.phases
            if len(phases) % 2 == 0:
                raise SequenceError("symmetric sequences have an odd number of segments")
            if any(abs(a - b) > 1e-12 for a, b in zip(phases, reversed(phases))):
                raise SequenceError("symmetric sequence phases must read the same backwards")
            if abs(phases[0]) > 1e-12:
                raise SequenceError("symmetric sequences start and end with phase 0")

    @classmethod
    def constant(cls, duration: float, phase: float = 0.0) -> "PhaseSequence":
        return cls((Segment(phase, duration),))

    @classmethod
    def from_phases(cls, phases: Sequence[float], duration: float, symmetric: bool = False) -> "PhaseSequence":
        return cls(tuple(Segment(float(phase), duration) for phase in phases), symmetric=symmetric)

    @classmethod
    def symmetric_from_free(cls, free_phases: Sequence[float], duration: float) -> "PhaseSequence":
        """(0, f1, ..., fk, ..., f1, 0) from the free half (f1, ..., fk)."""
        return cls.from_phases(symmetric_phases(free_phases), duration, symmetric=True)

    @classmethod
    def for_params(
        cls,
        phases: Sequence[float],
        derived: DerivedParams,
        timing: float = 1.0,
        tolerance: float = DETUNING_TOLERANCE,
    ) -> "PhaseSequence":
        """Equal segments of ``timing * tau0``, after checking the red-sideband condition."""
        check_red_detuned(derived, tolerance)
        phases = [float(phase) for phase in phases]
        symmetric = (
            len(phases) % 2 == 1
            and phases[0] == 0.0
            and all(a == b for a, b in zip(phases, reversed(phases)))
        )
        return cls.from_phases(phases, timing * derived.swap_time, symmetric=symmetric)

    @property
    def phases(self) -> tuple[float, ...]:
        return tuple(segment.phase for segment in self.segments)

    @property
    def free_phases(self) -> tuple[float, ...]:
        if not self.symmetric:
            raise SequenceError("only symmetric sequences have a free-phase vector")
        return self.phases[1:(len(self.segments) + 1) // 2]

    @property
    def n_segments(self) -> int:
        return len(self.segments)

    @property
    def total_duration(self) -> float:
        return math.fsum(segment.duration for segment in self.segments)

    @property
    def boundaries(self) -> tuple[float, ...]:
        ends, elapsed = [], 0.0
        for segment in self.segments:
            elapsed += segment.duration
            ends.append(elapsed)
        return tuple(ends)

    def negated(self) -> "PhaseSequence":
        return PhaseSequence(
            tuple(Segment(-segment.phase + 0.0, segment.duration) for segment in self.segments),
            symmetric=self.symmetric,
        )


def symmetric_phases(free_phases: Sequence[float]) -> tuple[float, ...]:
    free = tuple(float(phase) for phase in free_phases)
    if not free:
        return (0.0,)
    return (0.0,) + free + tuple(reversed(free[:-1])) + (0.0,)


@dataclass(frozen=True)
class NoiseAccumulator:
    """S_jk = integral over [0, tau] of exp(-2 mu x) |U_jk(x)|^2."""

    s11: float
    s12: float
    s21: float
    s22: float

    @classmethod
    def from_array(cls, values: np.ndarray) -> "NoiseAccumulator":
        return cls(float(values[0, 0]), float(values[0, 1]), float(values[1, 0]), float(values[1, 1]))

    def as_array(self) -> np.ndarray:
        return np.array([[self.s11, self.s12], [self.s21, self.s22]])


@dataclass(frozen=True)
class MeanNumbers:
    """<c^dag c> and <d^dag d> split into lossy-oscillation and thermal-noise parts."""

    photons: float
    phonons: float
    osc_photons: float
    noise_photons: float
    osc_phonons: float
    noise_phonons: float

    def as_row(self, t: float) -> dict:
        return {
            "t": t,
            "photons": self.photons,
            "phonons": self.phonons,
            "osc_photons": self.osc_photons,
            "noise_photons": self.noise_photons,
            "osc_phonons": self.osc_phonons,
            "noise_phonons": self.noise_phonons,
        }


# PROPAGATORS ----------------------------------------------------------------

def generator(phase: float, loss_asymmetry: float) -> np.ndarray:
    """H = exp(i phi) sigma_+ + exp(-i phi) sigma_- - i Gamma sigma_z."""
    return np.array(
        [[-1j * loss_asymmetry, cmath.exp(1j * phase)], [cmath.exp(-1j * phase), 1j * loss_asymmetry]],
        dtype=complex,
    )


def complex_rabi(loss_asymmetry: float) -> complex:
    """sqrt(1 - Gamma^2), imaginary past the exceptional point."""
    return cmath.sqrt(1.0 - loss_asymmetry ** 2)


def _cos_sinc(rabi: complex, x: float) -> tuple[complex, complex]:
    """(cos(Omega x), sin(Omega x) / Omega), finite as Omega -> 0."""
    z = rabi * x
    if abs(z) < 1e-4:
        z2 = z * z
        return 1 - z2 / 2 + z2 * z2 / 24, x * (1 - z2 / 6 + z2 * z2 / 120)
    return cmath.cos(z), cmath.sin(z) / rabi


def _evolution_matrix(phase: float, x: float, loss_asymmetry: float) -> np.ndarray:
    # x = g * tau, the bare accumulated coupling
    cos_term, sin_term = _cos_sinc(complex_rabi(loss_asymmetry), x)
    return cos_term * _IDENTITY - 1j * sin_term * generator(phase, loss_asymmetry)


def propagator(phase: float, tau: float, derived: DerivedParams) -> TransferMatrix:
    if tau < 0:
        raise SequenceError(f"propagation time must be non-negative, got {tau}")
    return TransferMatrix.from_array(
        _evolution_matrix(phase, derived.enhanced_coupling * tau, derived.loss_asymmetry)
    )


def _area_matrix(phase: float, area: float, loss_asymmetry: float) -> np.ndarray:
    if loss_asymmetry ** 2 >= 1:
        raise OverdampedRegimeError("accumulated area is undefined for Gamma^2 >= 1")
    return _evolution_matrix(phase, area / math.sqrt(1.0 - loss_asymmetry ** 2), loss_asymmetry)


def propagator_for_area(phase: float, area: float, loss_asymmetry: float) -> TransferMatrix:
    """Propagator after accumulating ``area`` = Omega g tau at fixed Gamma."""
    return TransferMatrix.from_array(_area_matrix(phase, area, loss_asymmetry))


def composite_propagator(seq: PhaseSequence, derived: DerivedParams) -> TransferMatrix:
    """U_N ... U_2 U_1 over the full sequence."""
    return sequence_propagator_at(seq, seq.total_duration, derived)


def sequence_propagator_at(seq: PhaseSequence, t: float, derived: DerivedParams) -> TransferMatrix:
    index, _, elapsed = _locate(seq, t)
    g, loss = derived.enhanced_coupling, derived.loss_asymmetry
    matrix = _evolution_matrix(seq.segments[index].phase, g * elapsed, loss)
    for earlier in reversed(seq.segments[:index]):
        matrix = matrix @ _evolution_matrix(earlier.phase, g * earlier.duration, loss)
    return TransferMatrix.from_array(matrix)


def three_segment_closed_form(u0: TransferMatrix, phase: float) -> TransferMatrix:
    """Elements of U_0 U_phi U_0 written through the elements of U_0."""
    u11, u12, u21, u22 = u0.u11, u0.u12, u0.u21, u0.u22
    swap = u12 * u21
    forward, backward = cmath.exp(1j * phase), cmath.exp(-1j * phase)
    return TransferMatrix(
        u11=u11 ** 3 + swap * (u22 + 2 * u11 * math.cos(phase)),
        u12=u12 * (u11 ** 2 + u22 ** 2 + backward * swap + forward * u11 * u22),
        u21=u21 * (u11 ** 2 + u22 ** 2 + forward * swap + backward * u11 * u22),
        u22=u22 ** 3 + swap * (u11 + 2 * u22 * math.cos(phase)),
    )


# NOISE INTEGRALS ------------------------------------------------------------

def _exp_integral(z: complex, tau: float) -> complex:
    """Integral of exp(z s) over [0, tau]."""
    w = z * tau
    if abs(w) < 1e-3:
        return tau * (1 + w / 2 + w * w / 6 + w * w * w / 24)
    return (cmath.exp(w) - 1) / z


def _weighted_squares(prefix: np.ndarray, phase: float, tau: float, derived: DerivedParams) -> np.ndarray:
    """Integral over s in [0, tau] of exp(-2 mu s) |(P U_phi(s))_jk|^2, elementwise.

    Writing P U(s) = A exp(i w s) + B exp(-i w s) with w = Omega g reduces the
    integrand to three exponentials, so the integral is closed form for any Gamma.
    """
    rabi = complex_rabi(derived.loss_asymmetry)
    if abs(rabi) < DEGENERATE_RABI:
        logger.debug("|Omega| = %.3g near the exceptional point; using quadrature", abs(rabi))
        return _weighted_squares_quad(prefix, phase, tau, derived)

    mu = derived.mean_decay
    omega = rabi * derived.enhanced_coupling
    cos_coeff = prefix
    sin_coeff = -1j * (prefix @ generator(phase, derived.loss_asymmetry))
    up = cos_coeff / 2 + sin_coeff / (2j * rabi)
    down = cos_coeff / 2 - sin_coeff / (2j * rabi)

    growth = 1j * (omega - omega.conjugate())
    beat = 1j * (omega + omega.conjugate())
    values = (
        np.abs(up) ** 2 * _exp_integral(growth - 2 * mu, tau)
        + np.abs(down) ** 2 * _exp_integral(-growth - 2 * mu, tau)
        + 2 * np.real(up * np.conj(down) * _exp_integral(beat - 2 * mu, tau))
    )
    return np.maximum(np.real(values), 0.0)


def _weighted_squares_quad(prefix: np.ndarray, phase: float, tau: float, derived: DerivedParams) -> np.ndarray:
    mu, g, loss = derived.mean_decay, derived.enhanced_coupling, derived.loss_asymmetry
    values = np.zeros((2, 2))
    if tau == 0:
        return values
    for row in range(2):
        for col in range(2):
            def integrand(s: float, row=row, col=col) -> float:
                element = (prefix @ _evolution_matrix(phase, g * s, loss))[row, col]
                return math.exp(-2 * mu * s) * abs(element) ** 2

            result = quad(integrand, 0.0, tau, epsrel=NOISE_QUAD_RTOL, epsabs=0.0,
                          limit=NOISE_QUAD_LIMIT, full_output=1)
            value, error = result[0], result[1]
            if len(result) > 3 or error > 1e-9 * max(abs(value), 1e-300):
                raise NumericalAccuracyError(
                    f"noise quadrature for S_{row + 1}{col + 1} did not converge (error {error:.2e})"
                )
            values[row, col] = value
    return values


def noise_integrals(phase: float, tau: float, derived: DerivedParams, method: str = "closed") -> NoiseAccumulator:
    """S_jk(tau) for constant phase; ``method="quad"`` forces adaptive quadrature."""
    if tau < 0:
        raise SequenceError(f"integration time must be non-negative, got {tau}")
    if method == "quad":
        values = _weighted_squares_quad(_IDENTITY, phase, tau, derived)
    elif method == "closed":
        values = _weighted_squares(_IDENTITY, phase, tau, derived)
    else:
        raise ValueError(f"unknown noise-integral method '{method}'")
    return NoiseAccumulator.from_array(values)


# MEAN NUMBERS ---------------------------------------------------------------

def _locate(seq: PhaseSequence, t: float) -> tuple[int, float, float]:
    """(segment index, segment start, time elapsed inside it) for time t."""
    total = seq.total_duration
    if t < 0 or t > total * (1 + 1e-12):
        raise OutOfRangeError(f"t = {t:.6g} outside the sequence span [0, {total:.6g}]")
    t = min(t, total)
    start = 0.0
    last = len(seq.segments) - 1
    for index, segment in enumerate(seq.segments):
        end = start + segment.duration
        if t <= end or index == last:
            return index, start, min(max(t - start, 0.0), segment.duration)
        start = end
    raise AssertionError("unreachable")


def _propagate(seq: PhaseSequence, t: float, derived: DerivedParams) -> tuple[np.ndarray, np.ndarray]:
    """Composite propagator up to t and the decay-weighted noise integrals.

    Noise injected during an earlier segment is integrated inside that segment
    and carried to t by the propagators of every later (partial) segment.
    """
    index, start, elapsed = _locate(seq, t)
    g, loss, mu = derived.enhanced_coupling, derived.loss_asymmetry, derived.mean_decay

    current = seq.segments[index]
    prefix = _evolution_matrix(current.phase, g * elapsed, loss)
    noise = _weighted_squares(_IDENTITY, current.phase, elapsed, derived)

    segment_end = start
    for earlier in reversed(seq.segments[:index]):
        weight = math.exp(-2 * mu * (t - segment_end))
        noise = noise + weight * _weighted_squares(prefix, earlier.phase, earlier.duration, derived)
        prefix = prefix @ _evolution_matrix(earlier.phase, g * earlier.duration, loss)
        segment_end -= earlier.duration
    return prefix, noise


def _numbers(matrix: np.ndarray, noise: np.ndarray, t: float, derived: DerivedParams,
             params: SystemParams) -> MeanNumbers:
    decay = math.exp(-2 * derived.mean_decay * t)
    magnitudes = np.abs(matrix) ** 2
    osc = decay * (params.init_photons * magnitudes[:, 0] + params.init_phonons * magnitudes[:, 1])
    thermal = derived.mod_cavity_decay * noise[:, 0] + derived.mod_mech_decay * noise[:, 1]
    return MeanNumbers(
        photons=float(osc[0] + thermal[0]),
        phonons=float(osc[1] + thermal[1]),
        osc_photons=float(osc[0]),
        noise_photons=float(thermal[0]),
        osc_phonons=float(osc[1]),
        noise_phonons=float(thermal[1]),
    )


def mean_numbers_constant(tau: float, derived: DerivedParams, params: SystemParams) -> MeanNumbers:
    if tau < 0:
        raise OutOfRangeError(f"tau must be non-negative, got {tau}")
    matrix = _evolution_matrix(0.0, derived.enhanced_coupling * tau, derived.loss_asymmetry)
    noise = _weighted_squares(_IDENTITY, 0.0, tau, derived)
    return _numbers(matrix, noise, tau, derived, params)


def mean_numbers_sequence(seq: PhaseSequence, t: float, derived: DerivedParams,
                          params: SystemParams) -> MeanNumbers:
    matrix, noise = _propagate(seq, t, derived)
    return _numbers(matrix, noise, t, derived, params)


def trace(seq: PhaseSequence, grid: Iterable[float], derived: DerivedParams,
          params: SystemParams) -> list[MeanNumbers]:
    """mean_numbers_sequence at every grid time (sorted, inside the sequence)."""
    times = [float(t) for t in grid]
    if any(later < earlier for earlier, later in zip(times, times[1:])):
        raise OutOfRangeError("trace grid must be sorted in increasing time")
    return [mean_numbers_sequence(seq, t, derived, params) for t in times]


def phonons_at_end(seq: PhaseSequence, derived: DerivedParams, params: SystemParams) -> float:
    return mean_numbers_sequence(seq, seq.total_duration, derived, params).phonons


def describe(seq: PhaseSequence, derived: Optional[DerivedParams] = None) -> str:
    phases = ", ".join(f"{phase:+.6f}" for phase in seq.phases)
    if derived is not None and derived.swap_time == derived.swap_time:
        timing = seq.segments[0].duration / derived.swap_time
        return f"N={seq.n_segments} phases=({phases}) segment={timing:.4g} tau0"
    return f"N={seq.n_segments} phases=({phases})"

"""Master-equation oracle for the linearized cavity-mechanics model.

Integrates

    drho/dt = -i [H(t), rho] + kappa D[c] rho + gamma D[d] rho,
    H(t) = -Delta c^dag c + omega_m d^dag d + g (e^{i phi} c^dag + e^{-i phi} c)(d^dag + d),

on a truncated Fock space without the rotating-wave approximation, so its
agreement with the evolution module is an independent check of the reduced
two-mode description.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator

from .config import (
    CUTOFF_STEP,
    DEFAULT_CUTOFF,
    LEAKAGE_THRESHOLD,
    LINDBLAD_ATOL,
    LINDBLAD_RTOL,
    LINDBLAD_SAMPLES,
    MAX_CUTOFF,
    NOISE_KNOTS,
    NOISE_PARAMETERS,
    NOISE_RANGE,
)
from .errors import ConfigError, CutoffTooSmallError, IntegratorError, NumericalAccuracyError, OutOfRangeError
from .evolution import PhaseSequence, mean_numbers_sequence
from .model import DerivedParams, SystemParams
from .optimizer import optimal_phase
from .tracing import log_leakage, maybe_track, span_context

logger = logging.getLogger(__name__)


def _annihilation(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1)), k=1).astype(complex)


@dataclass(frozen=True)
class ModeOperators:
    """c and d on the (cavity x mechanics) product space, levels 0..cutoff each."""
    c: np.ndarray
    d: np.ndarray

    @classmethod
    def build(cls, cutoffs: tuple[int, int]) -> "ModeOperators":
        n_c, n_m = cutoffs
        c = np.kron(_annihilation(n_c), np.eye(n_m + 1))
        d = np.kron(np.eye(n_c + 1), _annihilation(n_m))
        return cls(c=c, d=d)

    @property
    def n_c(self) -> np.ndarray:
        return self.c.conj().T @ self.c

    @property
    def n_d(self) -> np.ndarray:
        return self.d.conj().T @ self.d


# STATES ---------------------------------------------------------------------

@dataclass(frozen=True)
class TruncatedState:
    """Density operator on the truncated product space."""

    rho: np.ndarray
    cutoffs: tuple[int, int] = (DEFAULT_CUTOFF, DEFAULT_CUTOFF)
    time: float = 0.0

    @classmethod
    def fock(cls, n_photons: int, n_phonons: int,
             cutoffs: tuple[int, int] = (DEFAULT_CUTOFF, DEFAULT_CUTOFF)) -> "TruncatedState":
        if not (0 <= n_photons <= cutoffs[0] and 0 <= n_phonons <= cutoffs[1]):
            raise ConfigError(f"Fock state |{n_photons},{n_phonons}> does not fit cutoffs {cutoffs}")
        ket = np.zeros((cutoffs[0] + 1) * (cutoffs[1] + 1), dtype=complex)
        ket[n_photons * (cutoffs[1] + 1) + n_phonons] = 1.0
        return cls.from_ket(ket, cutoffs)

    @classmethod
    def from_ket(cls, ket: Sequence[complex],
                 cutoffs: tuple[int, int] = (DEFAULT_CUTOFF, DEFAULT_CUTOFF)) -> "TruncatedState":
        ket = np.asarray(ket, dtype=complex).ravel()
        if ket.size != (cutoffs[0] + 1) * (cutoffs[1] + 1):
            raise ConfigError(f"ket of size {ket.size} does not match cutoffs {cutoffs}")
        norm = np.linalg.norm(ket)
        if norm == 0:
            raise ConfigError("ket must be non-zero")
        ket = ket / norm
        return cls(rho=np.outer(ket, ket.conj()), cutoffs=tuple(cutoffs))

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def expect(self, operator: np.ndarray) -> complex:
        return complex(np.trace(self.rho @ operator))

    def marginals(self) -> tuple[np.ndarray, np.ndarray]:
        """Level populations of the cavity and of the mechanics."""
        n_c, n_m = self.cutoffs
        diagonal = np.real(np.diag(self.rho)).reshape(n_c + 1, n_m + 1)
        return diagonal.sum(axis=1), diagonal.sum(axis=0)

    def leakage(self) -> float:
        """Population in the two highest retained levels of either mode."""
        cavity, mechanics = self.marginals()
        return float(max(cavity[-2:].sum(), mechanics[-2:].sum()))

    def validate(self, trace_tol: float = 1e-8, hermitian_tol: float = 1e-10,
                 eigen_tol: float = 1e-8) -> None:
        trace = np.trace(self.rho)
        if abs(trace - 1) > trace_tol:
            raise NumericalAccuracyError(f"state trace {trace.real:.12f} deviates from 1")
        if np.max(np.abs(self.rho - self.rho.conj().T)) > hermitian_tol:
            raise NumericalAccuracyError("state is not Hermitian")
        lowest = float(np.min(np.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T))))
        if lowest < -eigen_tol:
            raise NumericalAccuracyError(f"state has negative eigenvalue {lowest:.3e}")


@dataclass(frozen=True)
class AngularMomentum:
    jx: float
    jy: float
    jz: float

    @property
    def norm_squared(self) -> float:
        return self.jx ** 2 + self.jy ** 2 + self.jz ** 2


def schwinger_expectations(state: TruncatedState) -> AngularMomentum:
    """Jx = Re<c^dag d>, Jy = -Im<c^dag d>, Jz = (<c^dag c> - <d^dag d>) / 2."""
    ops = ModeOperators.build(state.cutoffs)
    exchange = state.expect(ops.c.conj().T @ ops.d)
    photons = state.expect(ops.n_c).real
    phonons = state.expect(ops.n_d).real
    return AngularMomentum(jx=exchange.real, jy=-exchange.imag, jz=(photons - phonons) / 2)


# PARAMETER NOISE ------------------------------------------------------------

@dataclass(frozen=True)
class NoiseTrajectory:
    """Smooth multiplicative factors on g, omega_m, Delta, kappa, gamma."""

    t_span: float
    draws: Mapping[str, np.ndarray]
    _curves: Mapping[str, PchipInterpolator] = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_draws(cls, draws: Mapping[str, Sequence[float]], t_span: float) -> "NoiseTrajectory":
        if not t_span > 0:
            raise ConfigError("noise trajectory span must be positive", key="t_span")
        unknown = set(draws) - set(NOISE_PARAMETERS)
        if unknown:
            raise ConfigError(f"unknown noisy parameter(s): {', '.join(sorted(unknown))}")
        values = {name: np.asarray(draws[name], dtype=float) for name in draws}
        curves = {
            name: PchipInterpolator(np.linspace(0.0, t_span, len(samples)), samples)
            for name, samples in values.items()
        }
        return cls(t_span=t_span, draws=values, _curves=curves)

    def factor(self, name: str, t: float) -> float:
        curve = self._curves.get(name)
        if curve is None:
            return 1.0
        return float(curve(min(max(t, 0.0), self.t_span)))


def noisy_trajectory(seed: Optional[int], t_span: float, knots: int = NOISE_KNOTS) -> NoiseTrajectory:
    """Uniform draws in [0.95, 1.05] at equally spaced knots, per noisy parameter."""
    rng = np.random.default_rng(seed)
    low, high = NOISE_RANGE
    draws = {name: rng.uniform(low, high, size=knots) for name in NOISE_PARAMETERS}
    return NoiseTrajectory.from_draws(draws, t_span)


# INTEGRATION ----------------------------------------------------------------

@dataclass
class LindbladTrajectory:
    times: np.ndarray
    states: list[TruncatedState]
    sequence: PhaseSequence
    thermal: bool = False
    noisy: bool = False

    @property
    def final_state(self) -> TruncatedState:
        return self.states[-1]

    def occupations(self) -> tuple[np.ndarray, np.ndarray]:
        ops = ModeOperators.build(self.states[0].cutoffs)
        photons = np.array([state.expect(ops.n_c).real for state in self.states])
        phonons = np.array([state.expect(ops.n_d).real for state in self.states])
        return photons, phonons

    def to_rows(self) -> list[dict]:
        photons, phonons = self.occupations()
        rows = []
        for index, state in enumerate(self.states):
            spin = schwinger_expectations(state)
            rows.append({
                "t": float(self.times[index]),
                "Jx": spin.jx,
                "Jy": spin.jy,
                "Jz": spin.jz,
                "photons": float(photons[index]),
                "phonons": float(phonons[index]),
                "trace": float(np.trace(state.rho).real),
                "leakage": state.leakage(),
            })
        return rows


def _dissipator(rate: float, jump: np.ndarray, rho: np.ndarray) -> np.ndarray:
    jump_dag = jump.conj().T
    occupation = jump_dag @ jump
    return rate * (jump @ rho @ jump_dag - 0.5 * (occupation @ rho + rho @ occupation))


def _segment_rhs(phase: float, derived: DerivedParams, ops: ModeOperators,
                 noise: Optional[NoiseTrajectory], thermal: bool):
    dim = ops.c.shape[0]
    cavity_term = -derived.detuning * ops.n_c
    mech_term = derived.mech_freq * ops.n_d
    drive = np.exp(1j * phase) * ops.c.conj().T + np.exp(-1j * phase) * ops.c
    coupling_term = derived.enhanced_coupling * drive @ (ops.d.conj().T + ops.d)

    n_th_c = derived.thermal_occ_cavity if thermal else 0.0
    n_th_m = derived.thermal_occ_mech if thermal else 0.0
    jumps = [
        ("cavity_decay", derived.cavity_decay * (n_th_c + 1), ops.c),
        ("mech_decay", derived.mech_decay * (n_th_m + 1), ops.d),
    ]
    if thermal:
        jumps += [
            ("cavity_decay", derived.cavity_decay * n_th_c, ops.c.conj().T),
            ("mech_decay", derived.mech_decay * n_th_m, ops.d.conj().T),
        ]

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        rho = y.reshape(dim, dim)
        if noise is None:
            hamiltonian = cavity_term + mech_term + coupling_term
            scales = {"cavity_decay": 1.0, "mech_decay": 1.0}
        else:
            hamiltonian = (
                noise.factor("detuning", t) * cavity_term
                + noise.factor("mech_freq", t) * mech_term
                + noise.factor("coupling", t) * coupling_term
            )
            scales = {name: noise.factor(name, t) for name in ("cavity_decay", "mech_decay")}
        rho_dot = -1j * (hamiltonian @ rho - rho @ hamiltonian)
        for name, rate, jump in jumps:
            if rate:
                rho_dot += _dissipator(rate * scales[name], jump, rho)
        return rho_dot.ravel()

    return rhs


@maybe_track(name="lindblad_evolve")
def evolve(
    initial: TruncatedState,
    seq: PhaseSequence,
    derived: DerivedParams,
    noise: Optional[NoiseTrajectory] = None,
    t_end: Optional[float] = None,
    samples: int = LINDBLAD_SAMPLES,
    thermal: bool = False,
    leakage_threshold: float = LEAKAGE_THRESHOLD,
) -> LindbladTrajectory:
    """Integrate the master equation segment by segment up to ``t_end``."""
    total = seq.total_duration
    t_end = total if t_end is None else t_end
    if t_end < 0 or t_end > total * (1 + 1e-12):
        raise OutOfRangeError(f"t_end = {t_end:.6g} outside the sequence span [0, {total:.6g}]")
    if t_end == 0:
        return LindbladTrajectory(np.array([0.0]), [initial], seq, thermal, noise is not None)

    ops = ModeOperators.build(initial.cutoffs)
    dim = initial.dim
    grid = np.linspace(0.0, t_end, max(samples, 2))
    times, states = [0.0], [initial]
    rho = initial.rho.astype(complex)
    start = 0.0

    for index, segment in enumerate(seq.segments):
        if start >= t_end:
            break
        end = min(start + segment.duration, t_end)
        inside = grid[(grid > start) & (grid < end)]
        t_eval = np.concatenate([inside, [end]])
        with span_context("lindblad_segment", metadata={"index": index, "phase": segment.phase}):
            solution = solve_ivp(
                _segment_rhs(segment.phase, derived, ops, noise, thermal),
                (start, end),
                rho.ravel(),
                method="DOP853",
                t_eval=t_eval,
                rtol=LINDBLAD_RTOL,
                atol=LINDBLAD_ATOL,
            )
        if not solution.success:
            raise IntegratorError(f"master equation failed in segment {index}: {solution.message}")

        for t, column in zip(solution.t, solution.y.T):
            rho_t = column.reshape(dim, dim)
            rho_t = 0.5 * (rho_t + rho_t.conj().T)
            times.append(float(t))
            states.append(TruncatedState(rho=rho_t, cutoffs=initial.cutoffs, time=float(t)))
        rho = states[-1].rho
        logger.debug("segment %d done at t=%.4g, trace %.12f", index, end, np.trace(rho).real)
        start = end

    leakage = max(state.leakage() for state in states)
    log_leakage(max(initial.cutoffs), leakage, leakage_threshold)
    if leakage > leakage_threshold:
        raise CutoffTooSmallError(leakage, leakage_threshold)

    return LindbladTrajectory(np.array(times), states, seq, thermal, noise is not None)


# CROSS-CHECKS ---------------------------------------------------------------

def oracle_discrepancy(traj: LindbladTrajectory, derived: DerivedParams, params: SystemParams) -> float:
    """max |master equation - Langevin| occupation difference over (n0 + m0).

    The Langevin side is the noiseless prediction; thermal injection is
    included only when the trajectory was run with thermal dissipators.
    """
    if not traj.thermal:
        derived = replace(derived, mod_cavity_decay=0.0, mod_mech_decay=0.0)
    photons, phonons = traj.occupations()
    worst = 0.0
    for t, n_c, n_m in zip(traj.times, photons, phonons):
        langevin = mean_numbers_sequence(traj.sequence, float(t), derived, params)
        worst = max(worst, abs(n_c - langevin.photons), abs(n_m - langevin.phonons))
    scale = params.init_photons + params.init_phonons
    if scale == 0:
        raise ConfigError("oracle discrepancy needs a non-empty initial state")
    return worst / scale


def initial_fock_state(params: SystemParams, cutoff: int = DEFAULT_CUTOFF) -> TruncatedState:
    photons, phonons = params.init_photons, params.init_phonons
    if photons != math.floor(photons) or phonons != math.floor(phonons):
        raise ConfigError("the master-equation run needs integer initial occupations", key="init_phonons")
    return TruncatedState.fock(int(photons), int(phonons), (cutoff, cutoff))


def run_transfer_demo(
    derived: DerivedParams,
    params: SystemParams,
    phases: Optional[Sequence[float]] = None,
    timing: float = 0.9,
    noise: Optional[NoiseTrajectory] = None,
    cutoff: int = DEFAULT_CUTOFF,
    samples: int = LINDBLAD_SAMPLES,
    thermal: bool = False,
    leakage_threshold: float = LEAKAGE_THRESHOLD,
    max_cutoff: int = MAX_CUTOFF,
) -> LindbladTrajectory:
    """
    Equal segments of ``timing * tau0``; phases default to (0, phi_opt, 0).

    When the top two Fock levels hold more than ``leakage_threshold`` the run
    is repeated with a larger cutoff, up to ``max_cutoff``.
    """
    if phases is None:
        phases = (0.0, optimal_phase(derived.loss_asymmetry), 0.0)
    seq = PhaseSequence.for_params(phases, derived, timing=timing)
    while True:
        try:
            return evolve(initial_fock_state(params, cutoff), seq, derived, noise=noise,
                          samples=samples, thermal=thermal, leakage_threshold=leakage_threshold)
        except CutoffTooSmallError as exc:
            if cutoff + CUTOFF_STEP > max_cutoff:
                raise
            logger.info("leakage %.3e at cutoff %d; retrying with cutoff %d",
                        exc.leakage, cutoff, cutoff + CUTOFF_STEP)
            cutoff += CUTOFF_STEP

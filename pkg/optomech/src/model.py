"""Physical parameter model: semiclassical steady state and linearized-model constants.

All frequencies are ratios to the mechanical frequency (mech_freq = 1) and all
times are in units of 1/mech_freq.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import DETUNING_LOCK_ITERATIONS, DETUNING_TOLERANCE, MECH_FREQ, SWAP_AREA
from .errors import (
    ConfigError,
    DegenerateDriveError,
    DetuningMismatchError,
    FixedPointError,
    NonPositiveAreaError,
    OverdampedRegimeError,
)

logger = logging.getLogger(__name__)


class SystemParams(BaseModel):
    """Physical inputs of a driven optomechanical system."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: Optional[str] = None
    mech_freq: float = MECH_FREQ
    bare_coupling: float = Field(gt=0, description="g0")
    cavity_decay: float = Field(gt=0, description="kappa")
    mech_decay: float = Field(gt=0, description="gamma")
    drive_strength: Optional[float] = Field(default=None, ge=0, description="epsilon")
    photon_number: Optional[float] = Field(default=None, ge=0, description="n_p = |alpha|^2")
    enhanced_coupling: Optional[float] = Field(default=None, gt=0, description="g = g0 |alpha|")
    laser_detuning: Optional[float] = Field(
        default=None, description="omega_c - omega_p; omitted means locked to the red sideband"
    )
    thermal_occ_cavity: float = Field(default=0.0, ge=0)
    thermal_occ_mech: float = Field(default=0.0, ge=0)
    init_photons: float = Field(default=0.0, ge=0)
    init_phonons: float = Field(default=0.0, ge=0)

    @field_validator("mech_freq")
    @classmethod
    def _unit_frequency(cls, value: float) -> float:
        if value != MECH_FREQ:
            raise ValueError("mech_freq is the unit scale and must be exactly 1")
        return value

    @model_validator(mode="after")
    def _has_drive(self) -> "SystemParams":
        if self.drive_strength is None and self.photon_number is None and self.enhanced_coupling is None:
            raise ValueError("one of drive_strength, photon_number or enhanced_coupling is required")
        return self


@dataclass(frozen=True)
class DerivedParams:
    """Steady state plus the constants of the effective two-mode model."""

    alpha: complex
    beta: complex
    photon_number: float
    enhanced_coupling: float
    detuning: float
    loss_asymmetry: float
    mean_decay: float
    rabi: float
    swap_time: float
    mod_cavity_decay: float
    mod_mech_decay: float
    cavity_decay: float
    mech_decay: float
    bare_coupling: float
    thermal_occ_cavity: float = 0.0
    thermal_occ_mech: float = 0.0
    mech_freq: float = MECH_FREQ
    nominal_coupling: float = 0.0
    area_deviation: float = 0.0

    @classmethod
    def from_rates(
        cls,
        coupling: float,
        cavity_decay: float,
        mech_decay: float,
        *,
        thermal_occ_cavity: float = 0.0,
        thermal_occ_mech: float = 0.0,
        detuning: float = -MECH_FREQ,
        alpha: Optional[complex] = None,
        beta: complex = 0j,
        bare_coupling: Optional[float] = None,
        strict: bool = True,
    ) -> "DerivedParams":
        """Build the effective-model constants from (g, kappa, gamma) directly.

        With ``strict=False`` an overdamped set (Gamma^2 >= 1) is accepted and
        ``rabi``/``swap_time`` are NaN; propagators still work through analytic
        continuation but no sequence can be scheduled on it.
        """
        if coupling <= 0:
            raise ConfigError("enhanced coupling must be positive", key="enhanced_coupling")
        if cavity_decay < 0 or mech_decay < 0:
            raise ConfigError("decay rates must be non-negative")
        bare = bare_coupling if bare_coupling is not None else coupling
        if alpha is None:
            alpha = complex(coupling / bare)
        loss_asymmetry = (cavity_decay - mech_decay) / (4 * coupling)
        rabi, swap_time = _rabi_and_swap_time(coupling, loss_asymmetry, strict)
        return cls(
            alpha=complex(alpha),
            beta=complex(beta),
            photon_number=abs(alpha) ** 2,
            enhanced_coupling=coupling,
            detuning=detuning,
            loss_asymmetry=loss_asymmetry,
            mean_decay=(cavity_decay + mech_decay) / 4,
            rabi=rabi,
            swap_time=swap_time,
            mod_cavity_decay=cavity_decay * thermal_occ_cavity,
            mod_mech_decay=mech_decay * thermal_occ_mech,
            cavity_decay=cavity_decay,
            mech_decay=mech_decay,
            bare_coupling=bare,
            thermal_occ_cavity=thermal_occ_cavity,
            thermal_occ_mech=thermal_occ_mech,
            nominal_coupling=coupling,
        )

    def with_rates(
        self,
        coupling: float,
        cavity_decay: Optional[float] = None,
        mech_decay: Optional[float] = None,
        *,
        area_deviation: Optional[float] = None,
        strict: bool = True,
    ) -> "DerivedParams":
        """Copy with new (g, kappa, gamma); Gamma, mu, Omega follow, tau0 does not.

        The swap time is the measurement schedule and stays at the value the
        sequence was designed for.
        """
        if coupling <= 0:
            raise NonPositiveAreaError("enhanced coupling must stay positive")
        kappa = self.cavity_decay if cavity_decay is None else cavity_decay
        gamma = self.mech_decay if mech_decay is None else mech_decay
        if kappa < 0 or gamma < 0:
            raise ConfigError("decay rates must be non-negative")
        deviation = self.area_deviation if area_deviation is None else area_deviation
        loss_asymmetry = (kappa - gamma) / (4 * coupling)
        rabi, _ = _rabi_and_swap_time(coupling, loss_asymmetry, strict)
        alpha = self.alpha * (coupling / self.enhanced_coupling)
        return replace(
            self,
            alpha=alpha,
            photon_number=abs(alpha) ** 2,
            enhanced_coupling=coupling,
            loss_asymmetry=loss_asymmetry,
            mean_decay=(kappa + gamma) / 4,
            rabi=rabi,
            mod_cavity_decay=kappa * self.thermal_occ_cavity,
            mod_mech_decay=gamma * self.thermal_occ_mech,
            cavity_decay=kappa,
            mech_decay=gamma,
            nominal_coupling=coupling * SWAP_AREA / (SWAP_AREA + deviation),
            area_deviation=deviation,
        )


def _rabi_and_swap_time(coupling: float, loss_asymmetry: float, strict: bool) -> tuple[float, float]:
    radicand = 1.0 - loss_asymmetry ** 2
    if radicand <= 0:
        if strict:
            raise OverdampedRegimeError(
                f"|Gamma| = {abs(loss_asymmetry):.4g} >= 1: overdamped regime, no real swap time"
            )
        return math.nan, math.nan
    rabi = math.sqrt(radicand)
    return rabi, math.pi / (2 * coupling * rabi)


# STEADY STATE ---------------------------------------------------------------

def _target_photon_number(params: SystemParams) -> Optional[float]:
    if params.enhanced_coupling is not None:
        return (params.enhanced_coupling / params.bare_coupling) ** 2
    return params.photon_number


def _mech_amplitude(params: SystemParams, photons: float) -> complex:
    return -1j * params.bare_coupling * photons / (params.mech_decay / 2 + 1j * params.mech_freq)


def resolve_laser_detuning(params: SystemParams) -> float:
    """Return omega_c - omega_p, solving for the red-sideband lock when it is omitted."""
    if params.laser_detuning is not None:
        return params.laser_detuning

    photons = _target_photon_number(params)
    if photons is not None:
        beta = _mech_amplitude(params, photons)
        return params.mech_freq - 2 * params.bare_coupling * beta.real

    # Only epsilon is known: the photon number depends on the detuning itself.
    detuning = params.mech_freq
    for _ in range(DETUNING_LOCK_ITERATIONS):
        photons = params.drive_strength ** 2 / abs(params.cavity_decay + 2j * detuning) ** 2
        beta = _mech_amplitude(params, photons)
        updated = params.mech_freq - 2 * params.bare_coupling * beta.real
        if abs(updated - detuning) <= 1e-15 * max(1.0, abs(detuning)):
            return updated
        detuning = updated
    raise FixedPointError("red-sideband detuning lock did not converge")


def _drive_for(params: SystemParams, laser_detuning: float) -> float:
    photons = _target_photon_number(params)
    if photons is None:
        return params.drive_strength
    return math.sqrt(photons) * abs(params.cavity_decay + 2j * laser_detuning)


def drive_amplitude(params: SystemParams) -> float:
    """epsilon, back-solved from n_p (or g) when those are given."""
    return _drive_for(params, resolve_laser_detuning(params))


def compute_steady_state(params: SystemParams) -> tuple[complex, complex]:
    """Coherent amplitudes (alpha, beta) of the driven cavity and mechanics."""
    laser_detuning = resolve_laser_detuning(params)
    denominator = params.cavity_decay + 2j * laser_detuning
    if denominator == 0:
        raise DegenerateDriveError("kappa = 0 with a resonant drive has no steady state")
    alpha = _drive_for(params, laser_detuning) / denominator
    beta = _mech_amplitude(params, abs(alpha) ** 2)
    return alpha, beta


def derive(params: SystemParams) -> DerivedParams:
    alpha, beta = compute_steady_state(params)
    if params.enhanced_coupling is not None:
        coupling = params.enhanced_coupling
    else:
        coupling = params.bare_coupling * abs(alpha)
    if coupling == 0:
        raise DegenerateDriveError("zero drive leaves no enhanced coupling")

    detuning = -resolve_laser_detuning(params) - 2 * params.bare_coupling * beta.real
    derived = DerivedParams.from_rates(
        coupling,
        params.cavity_decay,
        params.mech_decay,
        thermal_occ_cavity=params.thermal_occ_cavity,
        thermal_occ_mech=params.thermal_occ_mech,
        detuning=detuning,
        alpha=alpha,
        beta=beta,
        bare_coupling=params.bare_coupling,
    )
    logger.debug(
        "derived g=%.6g Gamma=%.6g Omega=%.6g tau0=%.6g Delta=%.9g",
        derived.enhanced_coupling, derived.loss_asymmetry, derived.rabi,
        derived.swap_time, derived.detuning,
    )
    return derived


def apply_area_deviation(derived: DerivedParams, deviation: float) -> DerivedParams:
    """Rescale g so one swap time accumulates pi/2 + deviation; tau0 is kept.

    Deviations are additive: the nominal coupling is remembered, so applying
    a and then b equals applying a + b.
    """
    total = derived.area_deviation + deviation
    if SWAP_AREA + total <= 0:
        raise NonPositiveAreaError(f"area deviation {total:.4g} leaves a non-positive area")
    if deviation == 0:
        return derived
    coupling = derived.nominal_coupling * (SWAP_AREA + total) / SWAP_AREA
    return derived.with_rates(coupling, area_deviation=total)


def check_red_detuned(derived: DerivedParams, tolerance: float = DETUNING_TOLERANCE) -> None:
    mismatch = abs(derived.detuning + derived.mech_freq)
    if mismatch > tolerance * derived.mech_freq:
        raise DetuningMismatchError(
            f"Delta = {derived.detuning:.9g} is {mismatch:.3e} away from -omega_m"
        )

"""Exception hierarchy for the optomechanics toolkit.

Input problems subclass ValueError, numerical failures subclass RuntimeError,
so callers that only know the builtins still catch the right thing. The CLI
maps the two branches to different exit codes.
"""
from typing import Optional


class OptomechError(Exception):
    """Base class for every error raised by the package."""


# Input / model errors ------------------------------------------------------

class ConfigError(OptomechError, ValueError):
    """A parameter file or experiment config could not be parsed or validated."""

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        self.key = key
        self.line = line
        location = []
        if key:
            location.append(f"key '{key}'")
        if line is not None:
            location.append(f"line {line}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)


class DegenerateDriveError(OptomechError, ValueError):
    """Steady-state denominator vanishes (no cavity loss and resonant drive)."""


class OverdampedRegimeError(OptomechError, ValueError):
    """Gamma^2 >= 1: the effective Rabi frequency is not real."""


class NonPositiveAreaError(OptomechError, ValueError):
    """An area deviation would leave a non-positive interaction area."""


class DetuningMismatchError(OptomechError, ValueError):
    """The effective detuning is not at the red sideband."""


class SequenceError(OptomechError, ValueError):
    """Malformed phase sequence."""


class OutOfRangeError(OptomechError, ValueError):
    """Evaluation time outside the span of a sequence."""


class NoRealSolutionError(OptomechError, ValueError):
    """The optimal-phase condition has no real solution."""


class ProfileOverlapError(OptomechError, ValueError):
    """Adjacent smooth bumps overlap beyond the allowed level."""


# Numerical failures --------------------------------------------------------

class NumericalError(OptomechError, RuntimeError):
    """Base class for solver, quadrature and sampling failures."""


class NumericalAccuracyError(NumericalError):
    """Quadrature did not reach the requested accuracy."""


class ConvergenceError(NumericalError):
    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (residual {residual:.3e})")


class SamplingError(NumericalError):
    """No valid parameter draw within the resampling budget."""


class CutoffTooSmallError(NumericalError):
    def __init__(self, leakage: float, threshold: float):
        self.leakage = leakage
        self.threshold = threshold
        super().__init__(
            f"Fock cutoff too small: top-two-level population {leakage:.3e} exceeds {threshold:.1e}"
        )


class IntegratorError(NumericalError):
    """An ODE integration failed."""


class CalibrationError(NumericalError):
    """Amplitude factor calibration found no root."""


class FixedPointError(NumericalError):
    """Self-consistent steady state iteration did not converge."""

import math

import numpy as np
import pytest

from optomech.src.errors import ConvergenceError, NoRealSolutionError, OverdampedRegimeError, SequenceError
from optomech.src.evolution import PhaseSequence
from optomech.src.model import SystemParams
from optomech.src.optimizer import (
    area_sensitivity,
    finite_difference_derivative,
    find_sequence,
    flatness_coefficients,
    half_width,
    lossless_phases,
    optimal_phase,
    optimal_phase_pair,
    robustness_scan,
    sequence_phases,
    transfer_coefficients,
    wrap_phase,
)
from optomech.src.tracing_models import RobustnessCurve


def _same_angle(a, b, tol=1e-6):
    return abs(wrap_phase(a - b)) < tol


def test_lossless_optimal_phase():
    assert optimal_phase(0.0) == pytest.approx(2 * math.pi / 3, rel=1e-12)
    assert optimal_phase_pair(0.0) == (optimal_phase(0.0), -optimal_phase(0.0))


def test_low_loss_phase_close_to_lossless(cohen):
    _, d = cohen
    assert abs(optimal_phase(d.loss_asymmetry) - 2 * math.pi / 3) / (2 * math.pi / 3) <= 1e-5


def test_lecocq_optimal_phase(lecocq):
    _, d = lecocq
    assert optimal_phase(d.loss_asymmetry) == pytest.approx(1.8933, abs=1e-3)


def test_optimal_phase_limits():
    assert optimal_phase(1.0) == pytest.approx(0.0, abs=1e-7)
    with pytest.raises(NoRealSolutionError):
        optimal_phase(1.1)


def test_wrap_phase_range():
    assert wrap_phase(math.pi) == pytest.approx(math.pi)
    assert wrap_phase(-math.pi) == pytest.approx(math.pi)
    assert wrap_phase(3 * math.pi / 2) == pytest.approx(-math.pi / 2)


def test_lossless_seven_segment_family():
    expected = [0, -6, -4, -8, -4, -6, 0]
    for phase, numerator in zip(lossless_phases(7), expected):
        assert _same_angle(phase, numerator * math.pi / 7)
    with pytest.raises(SequenceError):
        lossless_phases(4)


# SENSITIVITY ----------------------------------------------------------------

@pytest.mark.parametrize("fixture", ["cohen", "lecocq"])
def test_first_derivative_vanishes_at_optimum(request, fixture):
    _, d = request.getfixturevalue(fixture)
    phases = (0.0, optimal_phase(d.loss_asymmetry), 0.0)
    assert abs(area_sensitivity(phases, d.loss_asymmetry)) <= 1e-6


def test_constant_phase_is_sensitive(cohen):
    _, d = cohen
    assert abs(area_sensitivity((0.0, 0.0, 0.0), d.loss_asymmetry)) > 1e-2


def test_palindromic_transfer_is_real():
    coefficients = transfer_coefficients((0.0, 0.7, -1.9, 0.7, 0.0), 0.3, 4)
    np.testing.assert_allclose(coefficients.imag, 0.0, atol=1e-12)


def test_three_segment_first_coefficient_vanishes_at_optimum():
    gamma = 0.349
    at_optimum = transfer_coefficients((0.0, optimal_phase(gamma), 0.0), gamma, 1)
    assert abs(at_optimum[1]) < 1e-12
    assert abs(transfer_coefficients((0.0, 0.0, 0.0), gamma, 1)[1]) > 0.1


@pytest.mark.parametrize("order", [1, 2, 3])
def test_series_matches_finite_differences(order):
    phases = (0.0, 1.2, -0.5, 1.2, 0.0)
    series = flatness_coefficients(phases, 0.3, order)[order] * math.factorial(order)
    stencil = finite_difference_derivative(phases, 0.3, order)
    assert series == pytest.approx(stencil, rel=1e-5, abs=1e-7)


# NUMERICAL SEARCH -----------------------------------------------------------

@pytest.mark.parametrize("gamma", [0.0, 0.1, 0.349])
def test_three_segment_search_matches_closed_form(gamma):
    result = find_sequence(3, gamma)
    assert result.converged
    assert result.phases[0] == result.phases[2] == 0.0
    assert result.phases[1] == pytest.approx(optimal_phase(gamma), abs=1e-6)


def test_seven_segment_search_recovers_lossless_family():
    result = find_sequence(7, 0.0)
    family = lossless_phases(7)
    matches = [
        all(_same_angle(sign * a, b, 1e-5) for a, b in zip(result.phases, family))
        for sign in (1, -1)
    ]
    assert any(matches)


@pytest.mark.parametrize("n", [5, 7])
def test_longer_sequences_are_flat(n):
    result = find_sequence(n, 0.1)
    assert result.residual <= 1e-8
    assert np.all(np.abs(transfer_coefficients(result.phases, 0.1, (n - 1) // 2)[1:]) <= 1e-7)
    assert result.phases == result.phases[::-1]


def test_search_edge_cases():
    assert find_sequence(1, 0.3).phases == [0.0]
    with pytest.raises(SequenceError):
        find_sequence(4, 0.3)
    with pytest.raises(OverdampedRegimeError):
        find_sequence(3, 1.2)


def test_convergence_error_carries_residual():
    error = ConvergenceError("no luck", 3e-4)
    assert error.residual == 3e-4
    assert "3.000e-04" in str(error)


def test_sequence_phase_defaults(lecocq):
    _, d = lecocq
    assert sequence_phases(3, d) == (0.0, optimal_phase(d.loss_asymmetry), 0.0)
    seven = sequence_phases(7, d)
    assert len(seven) == 7 and seven[1] > 0
    with pytest.raises(SequenceError):
        sequence_phases(2, d)


# ROBUSTNESS -----------------------------------------------------------------

@pytest.fixture
def photon_to_phonon():
    return SystemParams(bare_coupling=1e-4, enhanced_coupling=0.05, cavity_decay=0.01, mech_decay=0.01,
                        init_photons=1.0, init_phonons=0.0)


def test_half_width_grows_with_sequence_length(lossless, photon_to_phonon):
    grid = np.linspace(-1.0, 1.0, 401)
    widths = []
    for n in (1, 3, 5, 7):
        seq = PhaseSequence.from_phases(sequence_phases(n, lossless), lossless.swap_time)
        widths.append(half_width(robustness_scan(seq, grid, lossless, photon_to_phonon, label=f"N={n}")))
    assert all(later > earlier for earlier, later in zip(widths, widths[1:]))


def test_cohen_half_width_grows_with_sequence_length(cohen):
    params, d = cohen
    grid = np.linspace(-1.0, 1.0, 801)
    widths = []
    for n in (1, 3, 5, 7):
        seq = PhaseSequence.from_phases(sequence_phases(n, d), d.swap_time)
        widths.append(half_width(robustness_scan(seq, grid, d, params, label=f"N={n}")))
    assert all(later > earlier for earlier, later in zip(widths, widths[1:]))
    assert widths[0] == pytest.approx(0.034, abs=5e-3)


@pytest.mark.parametrize("n", [3, 5, 7])
def test_optimized_sequence_deviates_less_than_constant_driving(cohen, n):
    params, d = cohen
    grid = np.linspace(-0.3, 0.3, 61)
    optimized = robustness_scan(PhaseSequence.from_phases(sequence_phases(n, d), d.swap_time), grid, d, params)
    constant = robustness_scan(PhaseSequence.constant(n * d.swap_time), grid, d, params)
    tolerance = 1e-2 * constant.value_at(0.0)
    optimized_shift = np.abs(np.asarray(optimized.phonons) - optimized.value_at(0.0))
    constant_shift = np.abs(np.asarray(constant.phonons) - constant.value_at(0.0))
    assert np.all(optimized_shift <= constant_shift + tolerance)


def test_scan_at_zero_deviation_is_the_nominal_transfer(lossless, photon_to_phonon):
    seq = PhaseSequence.from_phases(sequence_phases(3, lossless), lossless.swap_time)
    curve = robustness_scan(seq, [-0.1, 0.0, 0.1], lossless, photon_to_phonon)
    expected = math.exp(-2 * lossless.mean_decay * seq.total_duration)
    assert curve.value_at(0.0) == pytest.approx(expected, rel=1e-10)


def test_scan_grid_must_increase(lossless, photon_to_phonon):
    seq = PhaseSequence.constant(lossless.swap_time)
    with pytest.raises(SequenceError):
        robustness_scan(seq, [0.1, 0.0], lossless, photon_to_phonon)


def test_half_width_needs_zero():
    curve = RobustnessCurve(deviations=[0.1, 0.2], phonons=[1.0, 1.0])
    with pytest.raises(SequenceError):
        half_width(curve)


def test_half_width_interpolates():
    curve = RobustnessCurve(deviations=[-0.2, -0.1, 0.0, 0.1, 0.2], phonons=[0.85, 0.95, 1.0, 0.95, 0.7])
    assert half_width(curve) == pytest.approx(0.12)

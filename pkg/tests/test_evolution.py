import math

import numpy as np
import pytest
from scipy.integrate import romb
from scipy.linalg import expm

from optomech.src.errors import OutOfRangeError, SequenceError
from optomech.src.evolution import (
    PhaseSequence,
    Segment,
    TransferMatrix,
    composite_propagator,
    generator,
    mean_numbers_constant,
    mean_numbers_sequence,
    noise_integrals,
    phonons_at_end,
    propagator,
    propagator_for_area,
    sequence_propagator_at,
    three_segment_closed_form,
    trace,
)
from optomech.src.model import DerivedParams, SystemParams
from optomech.src.optimizer import optimal_phase


def _expm_oracle(phase, tau, d):
    return expm(-1j * d.enhanced_coupling * tau * generator(phase, d.loss_asymmetry))


@pytest.mark.parametrize("phase", [0.0, 1.3, -2.7])
def test_propagator_matches_matrix_exponential(lecocq, phase):
    _, d = lecocq
    u = propagator(phase, d.swap_time, d).as_array()
    np.testing.assert_allclose(u, _expm_oracle(phase, d.swap_time, d), rtol=0, atol=1e-10)


def test_propagator_past_exceptional_point():
    d = DerivedParams.from_rates(0.01, 0.07, 0.001, strict=False)
    assert d.loss_asymmetry ** 2 > 1
    u = propagator(0.4, 40.0, d).as_array()
    np.testing.assert_allclose(u, _expm_oracle(0.4, 40.0, d), rtol=1e-10, atol=1e-12)


def test_unit_determinant(lecocq):
    _, d = lecocq
    for tau in (0.0, 17.0, d.swap_time, 3.3 * d.swap_time):
        assert propagator(0.8, tau, d).det() == pytest.approx(1.0, abs=1e-12)


def test_swap_at_swap_time(lossless, lecocq):
    u = propagator(0.0, lossless.swap_time, lossless)
    assert abs(u.u22) == pytest.approx(0.0, abs=1e-12)
    assert abs(u.u12) == pytest.approx(1.0, abs=1e-12)

    _, d = lecocq
    lossy = propagator(0.0, d.swap_time, d)
    assert abs(lossy.u22) == pytest.approx(abs(d.loss_asymmetry) / d.rabi, rel=1e-10)


def test_element_uses_one_based_indices():
    m = TransferMatrix(1, 2, 3, 4)
    assert (m.element(1, 2), m.element(2, 1)) == (2, 3)
    assert (TransferMatrix.identity() @ m) == m


def test_three_segment_closed_form_matches_products():
    rng = np.random.default_rng(11)
    for _ in range(100):
        gamma = rng.uniform(-0.95, 0.95)
        phase = rng.uniform(-math.pi, math.pi)
        area = rng.uniform(0.2, 3.0)
        u0 = propagator_for_area(0.0, area, gamma)
        product = u0 @ propagator_for_area(phase, area, gamma) @ u0
        closed = three_segment_closed_form(u0, phase)
        np.testing.assert_allclose(closed.as_array(), product.as_array(), rtol=0, atol=1e-12)


def test_composite_equals_ordered_product(lecocq):
    _, d = lecocq
    seq = PhaseSequence.from_phases((0.0, 1.1, -0.4), d.swap_time)
    expected = np.eye(2, dtype=complex)
    for phase in seq.phases:
        expected = propagator(phase, d.swap_time, d).as_array() @ expected
    np.testing.assert_allclose(composite_propagator(seq, d).as_array(), expected, atol=1e-13)


def test_propagator_inside_a_segment(lecocq):
    _, d = lecocq
    seq = PhaseSequence.from_phases((0.0, 2.0, 0.0), d.swap_time)
    t = 1.5 * d.swap_time
    expected = propagator(2.0, 0.5 * d.swap_time, d) @ propagator(0.0, d.swap_time, d)
    np.testing.assert_allclose(sequence_propagator_at(seq, t, d).as_array(), expected.as_array(), atol=1e-13)


# NOISE INTEGRALS ------------------------------------------------------------

def _romberg_oracle(phase, tau, d):
    samples = np.linspace(0.0, tau, 2 ** 12 + 1)
    values = np.array([
        math.exp(-2 * d.mean_decay * s) * np.abs(propagator(phase, s, d).as_array()) ** 2 for s in samples
    ])
    return np.array([[romb(values[:, i, j], dx=samples[1]) for j in range(2)] for i in range(2)])


def test_closed_form_noise_matches_quadrature_oracles(lecocq):
    _, d = lecocq
    closed = noise_integrals(0.0, d.swap_time, d).as_array()
    quad = noise_integrals(0.0, d.swap_time, d, method="quad").as_array()
    oracle = _romberg_oracle(0.0, d.swap_time, d)
    np.testing.assert_allclose(closed, quad, rtol=1e-8)
    np.testing.assert_allclose(closed, oracle, rtol=1e-8)


def test_noise_integrals_past_exceptional_point():
    d = DerivedParams.from_rates(0.01, 0.07, 0.001, strict=False)
    closed = noise_integrals(0.3, 25.0, d).as_array()
    quad = noise_integrals(0.3, 25.0, d, method="quad").as_array()
    np.testing.assert_allclose(closed, quad, rtol=1e-8)


def test_noise_integrals_at_zero_time(cohen):
    _, d = cohen
    assert np.all(noise_integrals(0.0, 0.0, d).as_array() == 0.0)
    with pytest.raises(SequenceError):
        noise_integrals(0.0, -1.0, d)


# MEAN NUMBERS ---------------------------------------------------------------

def test_lossless_swap_exchanges_occupations(lossless):
    params = SystemParams(bare_coupling=1e-4, enhanced_coupling=0.05, cavity_decay=0.01, mech_decay=0.01,
                          init_photons=0.3, init_phonons=2.0)
    numbers = mean_numbers_constant(lossless.swap_time, lossless, params)
    decay = math.exp(-2 * lossless.mean_decay * lossless.swap_time)
    assert numbers.photons == pytest.approx(2.0 * decay, rel=1e-10)
    assert numbers.phonons == pytest.approx(0.3 * decay, rel=1e-10)


def test_total_occupation_decays_uniformly_without_asymmetry(lossless):
    params = SystemParams(bare_coupling=1e-4, enhanced_coupling=0.05, cavity_decay=0.01, mech_decay=0.01,
                          init_photons=0.3, init_phonons=2.0)
    seq = PhaseSequence.from_phases((0.0, 2.1, -1.0, 2.1, 0.0), lossless.swap_time)
    for t in np.linspace(0.0, seq.total_duration, 23):
        numbers = mean_numbers_sequence(seq, t, lossless, params)
        expected = 2.3 * math.exp(-2 * lossless.mean_decay * t)
        assert numbers.photons + numbers.phonons == pytest.approx(expected, rel=1e-10)


def test_zero_phase_sequence_equals_constant_driving(cohen):
    params, d = cohen
    seq = PhaseSequence.from_phases((0.0, 0.0, 0.0), d.swap_time)
    split = mean_numbers_sequence(seq, seq.total_duration, d, params)
    whole = mean_numbers_constant(3 * d.swap_time, d, params)
    assert split.phonons == pytest.approx(whole.phonons, rel=1e-10)
    assert split.photons == pytest.approx(whole.photons, rel=1e-10)
    assert split.noise_phonons == pytest.approx(whole.noise_phonons, rel=1e-10)


def test_phase_sign_does_not_change_occupations(lecocq):
    params, d = lecocq
    seq = PhaseSequence.from_phases((0.0, 1.9, 0.0), d.swap_time, symmetric=True)
    assert phonons_at_end(seq.negated(), d, params) == pytest.approx(phonons_at_end(seq, d, params), rel=1e-12)


def test_occupations_continuous_across_boundaries(lecocq):
    params, d = lecocq
    seq = PhaseSequence.from_phases((0.0, 1.9, 0.0), d.swap_time)
    for boundary in seq.boundaries[:-1]:
        at = mean_numbers_sequence(seq, boundary, d, params).phonons
        before = mean_numbers_sequence(seq, boundary - 1e-7, d, params).phonons
        after = mean_numbers_sequence(seq, boundary + 1e-7, d, params).phonons
        assert at == pytest.approx(before, rel=1e-6)
        assert at == pytest.approx(after, rel=1e-6)


@pytest.mark.parametrize("fixture, constant, composite", [
    ("cohen", 0.871, 0.870),
    ("lecocq", 0.337, 0.627),
])
def test_central_phonon_numbers(request, fixture, constant, composite):
    params, d = request.getfixturevalue(fixture)
    flat = PhaseSequence.constant(3 * d.swap_time)
    shaped = PhaseSequence.from_phases((0.0, optimal_phase(d.loss_asymmetry), 0.0), d.swap_time)
    assert phonons_at_end(flat, d, params) == pytest.approx(constant, rel=2e-2)
    assert phonons_at_end(shaped, d, params) == pytest.approx(composite, rel=2e-2)


def test_groblacher_row_is_offset_but_keeps_the_composite_gap(groblacher):
    # the tabulated 0.0454 / 0.0456 sit a uniform 0.0074 above what these rates give
    params, d = groblacher
    flat = phonons_at_end(PhaseSequence.constant(3 * d.swap_time), d, params)
    shaped = phonons_at_end(PhaseSequence.from_phases((0.0, optimal_phase(d.loss_asymmetry), 0.0), d.swap_time),
                            d, params)
    assert flat == pytest.approx(0.0380, abs=1e-3)
    assert shaped - flat == pytest.approx(2e-4, abs=1.5e-4)


def test_trace_rejects_unsorted_and_out_of_range(cohen):
    params, d = cohen
    seq = PhaseSequence.constant(d.swap_time)
    with pytest.raises(OutOfRangeError):
        trace(seq, [0.0, 2.0, 1.0], d, params)
    with pytest.raises(OutOfRangeError):
        mean_numbers_sequence(seq, 2 * d.swap_time, d, params)
    with pytest.raises(OutOfRangeError):
        mean_numbers_sequence(seq, -1.0, d, params)


# SEQUENCES ------------------------------------------------------------------

def test_sequence_validation():
    with pytest.raises(SequenceError):
        PhaseSequence(())
    with pytest.raises(SequenceError):
        PhaseSequence((Segment(0.0, 1.0), Segment(1.0, 0.0)))
    with pytest.raises(SequenceError):
        PhaseSequence.from_phases((0.0, 1.0, 0.5), 1.0, symmetric=True)
    with pytest.raises(SequenceError):
        PhaseSequence.from_phases((0.3, 1.0, 0.3), 1.0, symmetric=True)


def test_symmetric_from_free_phases():
    seq = PhaseSequence.symmetric_from_free((1.0, 2.0, 3.0), 5.0)
    assert seq.phases == (0.0, 1.0, 2.0, 3.0, 2.0, 1.0, 0.0)
    assert seq.free_phases == (1.0, 2.0, 3.0)
    assert seq.total_duration == pytest.approx(35.0)
    assert seq.boundaries[-1] == pytest.approx(35.0)


def test_for_params_detects_symmetry(cohen):
    _, d = cohen
    assert PhaseSequence.for_params((0.0, 2.0, 0.0), d).symmetric
    assert not PhaseSequence.for_params((0.0, 2.0, 1.0), d).symmetric
    assert PhaseSequence.for_params((0.0,), d, timing=0.9).total_duration == pytest.approx(0.9 * d.swap_time)

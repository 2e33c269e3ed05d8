import numpy as np
import pytest

from icgscan.cdetect import (
    active_regions,
    detect_c_peaks,
    merge_close_candidates,
    reference_amplitude,
    relative_energy,
)
from icgscan.core import DelineationParams, Signal, SignalTooShortError
from icgscan.synth import SyntheticBeatSpec, generate


def first_window(morphology: str = "b-local-min") -> Signal:
    params = DelineationParams.physiological()
    record = generate(SyntheticBeatSpec(morphology=morphology), 10.0, 250.0, params=params)
    return record.signal.slice(0, 750)


def test_relative_energy_of_constant_signal_is_the_signal() -> None:
    signal = Signal(np.full(400, 0.7), 250.0)

    trace = relative_energy(signal)

    assert np.allclose(trace.c_coeff, 1.0)
    assert np.allclose(trace.xre, signal.samples)


def test_relative_energy_needs_a_long_window_of_samples() -> None:
    with pytest.raises(SignalTooShortError):
        relative_energy(Signal(np.ones(200), 250.0))


def test_relative_energy_emphasises_short_bursts() -> None:
    samples = np.zeros(750)
    samples[370:381] = 1.0
    trace = relative_energy(Signal(samples, 250.0))

    assert trace.c_coeff[375] > 1.0
    assert int(np.argmax(trace.xre)) in range(370, 381)


def test_active_regions_open_on_upward_crossing_and_close_below_min() -> None:
    xre = np.array([0.0, 0.5, 1.2, 2.0, 1.0, 0.05, 0.0, 1.5, 0.3, 0.01])

    assert active_regions(xre, 1.0, 0.1) == [(2, 5), (7, 9)]


def test_window_starting_above_threshold_opens_nothing_until_it_recrosses() -> None:
    xre = np.array([2.0, 1.5, 0.05, 1.2, 0.0])

    assert active_regions(xre, 1.0, 0.1) == [(3, 4)]


def test_region_left_open_runs_to_window_end() -> None:
    xre = np.array([0.0, 2.0, 1.5, 0.5])

    assert active_regions(xre, 1.0, 0.1) == [(1, 4)]


def test_merge_keeps_higher_of_close_candidates() -> None:
    samples = np.zeros(400)
    samples[[10, 40, 300, 320]] = [0.5, 0.9, 0.8, 0.3]

    assert merge_close_candidates([10, 40, 300, 320], samples, 250.0, 0.25) == [40, 300]


def test_reference_amplitude_prefers_second_highest_peak() -> None:
    params = DelineationParams()
    xre = np.zeros(750)
    xre[[100, 350, 600]] = [5.0, 3.0, 2.9]

    assert reference_amplitude(xre, 250.0, params) == 3.0

    lone = np.zeros(750)
    lone[[100, 350]] = [5.0, 0.001]
    assert reference_amplitude(lone, 250.0, params) == 5.0


def test_detects_every_c_peak_of_a_clean_window() -> None:
    params = DelineationParams.physiological()
    window = first_window()

    peaks = detect_c_peaks(window, relative_energy(window), params)

    assert peaks.positions.tolist() == [125, 375, 625]
    assert np.allclose(peaks.amplitudes, 1.0)


@pytest.mark.parametrize("morphology", ["b-notch", "x-local-min-only"])
def test_detects_c_peaks_for_other_morphologies(morphology: str) -> None:
    params = DelineationParams.physiological()
    window = first_window(morphology)

    peaks = detect_c_peaks(window, relative_energy(window), params)

    assert peaks.positions.tolist() == [125, 375, 625]


def test_short_cc_interval_is_rejected_against_history() -> None:
    params = DelineationParams.physiological()
    window = first_window()
    trace = relative_energy(window)

    accepted = detect_c_peaks(window, trace, params, prior_intervals=[1.0] * 5, last_c=-125)
    rejected = detect_c_peaks(window, trace, params, prior_intervals=[1.0] * 5, last_c=0)

    assert accepted.positions.tolist() == [125, 375, 625]
    assert rejected.positions.tolist() == [375, 625]


def test_candidates_at_or_before_last_c_are_skipped() -> None:
    params = DelineationParams.physiological()
    window = first_window()

    peaks = detect_c_peaks(window, relative_energy(window), params, last_c=375)

    assert peaks.positions.tolist() == [625]


def test_candidates_below_the_amplitude_floor_are_dropped() -> None:
    params = DelineationParams.physiological()
    window = first_window()
    trace = relative_energy(window)

    assert detect_c_peaks(window, trace, params, recent_c_ampl=1.0).positions.tolist() == [125, 375, 625]
    assert detect_c_peaks(window, trace, params, recent_c_ampl=1.9).positions.tolist() == [125, 375, 625]
    assert len(detect_c_peaks(window, trace, params, recent_c_ampl=2.5)) == 0
    assert len(detect_c_peaks(window, trace, params.with_overrides(c_floor_frac=0.0), recent_c_ampl=2.5)) == 3


def test_faint_window_after_strong_beats_yields_no_c_peak() -> None:
    params = DelineationParams.physiological()
    faint = first_window().with_samples(first_window().samples * 0.1)

    assert len(detect_c_peaks(faint, relative_energy(faint), params)) == 3
    assert len(detect_c_peaks(faint, relative_energy(faint), params, recent_c_ampl=1.0)) == 0


def test_flat_window_has_no_c_peaks() -> None:
    window = Signal(np.zeros(750), 250.0)

    peaks = detect_c_peaks(window, relative_energy(window), DelineationParams())

    assert len(peaks) == 0

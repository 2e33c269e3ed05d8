import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from icgscan.core import (
    BeatAnnotation,
    DelineationParams,
    Signal,
    ms_to_samples,
    point_series,
    samples_to_ms,
    signed_ms_to_samples,
)
from icgscan.utils import (
    is_local_max,
    is_local_min,
    is_local_peak,
    local_maxima_mask,
    local_minima_mask,
)


def test_ms_to_samples_rounds_to_nearest_sample() -> None:
    assert ms_to_samples(80, 250) == 20
    assert ms_to_samples(140, 250) == 35
    assert ms_to_samples(40, 250) == 10
    assert ms_to_samples(0, 250) == 0
    assert signed_ms_to_samples(-60, 250) == -15
    assert signed_ms_to_samples(60, 250) == 15


def test_ms_to_samples_rejects_negative_durations_and_rates() -> None:
    with pytest.raises(ValueError):
        ms_to_samples(-1, 250)
    with pytest.raises(ValueError):
        ms_to_samples(10, 0)


def test_signal_validates_shape_and_rate() -> None:
    signal = Signal([0, 1, 2, 3], 250)

    assert len(signal) == 4
    assert signal.samples.dtype == float
    assert signal.duration_s == pytest.approx(4 / 250)
    assert signal.slice(1, 3).samples.tolist() == [1.0, 2.0]

    with pytest.raises(ValueError):
        Signal(np.zeros((2, 2)), 250)
    with pytest.raises(ValueError):
        Signal([1.0, 2.0], 0)


SAMPLING_RATES = st.sampled_from([100.0, 125.0, 250.0, 500.0, 1000.0, 2000.0])


@given(t_ms=st.floats(min_value=0.0, max_value=60_000.0), fs=SAMPLING_RATES)
def test_ms_round_trip_is_within_half_a_sample(t_ms: float, fs: float) -> None:
    back = samples_to_ms(ms_to_samples(t_ms, fs), fs)

    assert abs(back - t_ms) <= 500.0 / fs + 1e-9


@given(n=st.integers(min_value=0, max_value=10_000_000), fs=SAMPLING_RATES)
def test_sample_counts_survive_a_trip_through_ms(n: int, fs: float) -> None:
    assert ms_to_samples(samples_to_ms(n, fs), fs) == n


def test_signal_times_follow_the_sampling_rate() -> None:
    signal = Signal(np.zeros(5), 250)

    assert signal.times().tolist() == pytest.approx([0.0, 0.004, 0.008, 0.012, 0.016])


def test_beat_annotation_enforces_point_order() -> None:
    with pytest.raises(ValueError):
        BeatAnnotation(b=110, c=100, x=150, o=170)
    with pytest.raises(ValueError):
        BeatAnnotation(b=90, c=100, x=170, o=150)

    partial = BeatAnnotation(c=100, o=170)
    assert partial.points() == {"b": None, "c": 100, "x": None, "o": 170}
    assert not partial.is_complete


def test_beat_annotation_amplitudes_and_shift() -> None:
    samples = np.arange(200, dtype=float) / 10
    beat = BeatAnnotation(b=85, c=100, x=156, o=178).with_amplitudes(samples)

    assert beat.amp_c == pytest.approx(10.0)
    assert beat.amplitude("o") == pytest.approx(17.8)

    moved = beat.shifted(-50)
    assert moved.indices() == (35, 50, 106, 128)
    assert moved.amp_b == beat.amp_b
    assert BeatAnnotation.from_dict(beat.to_dict()) == beat


def test_point_series_skips_absent_points() -> None:
    beats = [BeatAnnotation(b=10, c=20), BeatAnnotation(c=270, x=326), BeatAnnotation(b=505, c=520)]

    assert point_series(beats, "b") == [10, 505]
    assert point_series(beats, "c") == [20, 270, 520]
    assert point_series(beats, "o") == []


def test_delineation_params_defaults_and_geometry_checks() -> None:
    params = DelineationParams()

    assert params.snr_thr == 30.0
    assert params.sg_len_max == 31
    assert params.cc_valid_factor == 1.7
    assert params.reach_samples(250) == 10

    with pytest.raises(ValidationError):
        DelineationParams(sg_len_start=4)
    with pytest.raises(ValidationError):
        DelineationParams(cx_min_ms=40, cx_max_ms=30)
    with pytest.raises(ValidationError):
        DelineationParams(unknown_knob=1)


def test_delineation_params_are_frozen_and_overridable() -> None:
    params = DelineationParams()

    with pytest.raises(ValidationError):
        params.snr_thr = 10.0

    tuned = params.with_overrides(b_slope1=0.2)
    assert tuned.b_slope1 == 0.2
    assert params.b_slope1 == 0.11
    with pytest.raises(ValidationError):
        params.with_overrides(a_frac=1.5)


def test_physiological_preset_scales_xo_windows() -> None:
    params = DelineationParams.physiological()

    assert (params.cx_min_ms, params.cx_max_ms) == (150.0, 300.0)
    assert (params.co_min_ms, params.co_max_ms) == (200.0, 400.0)
    assert (params.xo_min_ms, params.xo_max_ms) == (20.0, 150.0)
    assert params.b_window_ms == 80.0
    assert params.reach_samples(250) == 100
    assert DelineationParams.physiological(xo_max_ms=120).xo_max_ms == 120


def test_local_extremum_plateaus_count_leftmost_sample_only() -> None:
    samples = [3.0, 1.0, 1.0, 2.0, 2.0, 0.5]

    assert is_local_min(samples, 1)
    assert not is_local_min(samples, 2)
    assert is_local_max(samples, 3)
    assert not is_local_max(samples, 4)
    assert not is_local_min(samples, 0)
    assert not is_local_min([3.0, 1.0, 1.0], 1)


@given(st.lists(st.integers(min_value=-3, max_value=3), min_size=0, max_size=40))
def test_vectorised_masks_agree_with_scalar_tests(values) -> None:
    samples = [float(v) for v in values]

    assert local_minima_mask(samples).tolist() == [is_local_min(samples, i) for i in range(len(samples))]
    assert local_maxima_mask(samples).tolist() == [is_local_max(samples, i) for i in range(len(samples))]


def test_is_local_peak_uses_radius_and_excludes_edges() -> None:
    samples = np.array([0.0, 1.0, 0.5, 0.9, 0.2, 0.0])

    assert is_local_peak(samples, 1, 2)
    assert not is_local_peak(samples, 3, 2)
    assert is_local_peak(samples, 3, 1)
    assert not is_local_peak(np.array([5.0, 1.0, 0.0]), 0, 2)

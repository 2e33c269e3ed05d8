import time

import numpy as np
import pytest

from icgscan import DelineationResult, IcgDelineator, run_pipeline
from icgscan.core import (
    POINT_TYPES,
    BeatAnnotation,
    DelineationParams,
    InvalidGeometryError,
    Signal,
    TooShortRecordError,
    WindowSegment,
)
from icgscan.evaluation import evaluate_corpus, evaluate_record
from icgscan.synth import SyntheticBeatSpec, generate

FS = 250.0


def test_clean_corpus_is_delineated_within_tolerance(clean_corpus, physiological_params) -> None:
    report = evaluate_corpus(clean_corpus, physiological_params)

    for point in POINT_TYPES:
        assert report.gmean(point) == 100.0, (point, report.points[point])
    assert report.points["c"].me < 8.0
    assert report.hemo["hr"].rel_mean < 1.0


def test_noisy_corpus_meets_detection_targets(noisy_corpus, physiological_params) -> None:
    report = evaluate_corpus(noisy_corpus, physiological_params, max_workers=4)

    assert report.records == len(noisy_corpus)
    assert report.gmean("c") >= 97.0
    assert report.gmean("b") >= 90.0
    assert report.filter_length_mean is not None
    assert report.filter_length_mean > 3.0


def test_beats_come_out_in_order_without_duplicates(clean_corpus, physiological_params) -> None:
    record = clean_corpus[0]

    result = IcgDelineator(physiological_params).run(record.signal)
    c_positions = [beat.c for beat in result.beats]

    assert c_positions == sorted(set(c_positions))
    assert len(result.beats) == len(record.beats)
    for beat in result.beats:
        present = [index for index in beat.indices() if index is not None]
        assert present == sorted(present)
        assert beat.amp_c == pytest.approx(record.signal.samples[beat.c])


def test_windows_chain_from_last_o_point(clean_corpus, physiological_params) -> None:
    result = IcgDelineator(physiological_params).run(clean_corpus[0].signal)
    o_points = {beat.o for beat in result.beats}
    starts = [window.start for window in result.windows]

    assert starts[0] == 0
    assert starts == sorted(set(starts))
    assert all(start in o_points for start in starts[1:])
    assert result.windows[-1].stop == len(clean_corpus[0].signal)
    assert len(result.filter_lengths) == len(result.windows)


def test_default_windows_with_fixed_short_filter() -> None:
    record = generate(SyntheticBeatSpec(), 30.0, FS)

    beats = run_pipeline(record.signal, DelineationParams(), filter_length=3)
    report = evaluate_record(beats, record.beats, FS)

    for point in POINT_TYPES:
        assert report.gmean(point) >= 97.0, (point, report.points[point])


def test_flat_tail_after_the_last_beat_adds_no_c_peak(physiological_params) -> None:
    record = generate(SyntheticBeatSpec(morphology="x-local-min-only"), 30.0, FS, params=physiological_params)

    result = IcgDelineator(physiological_params).run(record.signal)
    report = evaluate_record(result.beats, record.beats, FS)

    assert len(result.beats) == len(record.beats)
    assert report.points["c"].fp == 0
    assert result.beats[-1].c < record.beats[-1].c + 10


def test_adaptive_filter_erases_default_xo_windows() -> None:
    record = generate(SyntheticBeatSpec(morphology="b-notch"), 30.0, FS)

    result = IcgDelineator(DelineationParams()).run(record.signal)
    report = evaluate_record(result.beats, record.beats, FS)

    assert min(result.filter_lengths) > 9
    assert report.points["x"].tp == 0
    assert report.points["o"].tp == 0


def test_next_window_starts_at_last_o() -> None:
    delineator = IcgDelineator(DelineationParams.physiological())
    segment = WindowSegment(0, 750)
    emitted = [BeatAnnotation(b=110, c=125, x=181, o=203), BeatAnnotation(b=360, c=375, x=431, o=453)]

    assert delineator.next_start(segment, emitted, 3, FS, deferred_c=690) == 453


def test_deferred_c_is_reentered_with_room_for_its_b_window() -> None:
    delineator = IcgDelineator(DelineationParams.physiological())
    segment = WindowSegment(1000, 750)

    start = delineator.next_start(segment, [], 1, FS, deferred_c=1700)

    assert start == 1660
    assert 1700 - start >= 20
    assert delineator.next_start(segment, [], 1, FS) == 1625
    assert delineator.next_start(segment, [], 0, FS) == 1750


def test_c_without_o_anchors_a_quarter_second_later() -> None:
    delineator = IcgDelineator(DelineationParams.physiological())
    emitted = [BeatAnnotation(b=110, c=125)]

    assert delineator.next_start(WindowSegment(0, 750), emitted, 1, FS) == 187
    assert delineator.next_start(WindowSegment(0, 750), [BeatAnnotation(c=700)], 1, FS) == 625


def test_delineation_is_deterministic(noisy_corpus, physiological_params) -> None:
    signal = noisy_corpus[2].signal

    first = IcgDelineator(physiological_params).run(signal)
    second = IcgDelineator(physiological_params).run(signal)

    assert first.to_json() == second.to_json()


@pytest.mark.parametrize("factor", [0.5, 2.0, 4.0])
def test_delineation_ignores_amplitude_scale(noisy_corpus, physiological_params, factor: float) -> None:
    signal = noisy_corpus[1].signal
    scaled = signal.with_samples(signal.samples * factor)

    beats = run_pipeline(signal, physiological_params)
    scaled_beats = run_pipeline(scaled, physiological_params)

    assert [beat.indices() for beat in scaled_beats] == [beat.indices() for beat in beats]


def test_record_shorter_than_one_window_is_rejected() -> None:
    with pytest.raises(TooShortRecordError):
        run_pipeline(Signal(np.zeros(700), FS))


def test_flat_record_yields_no_beats() -> None:
    result = IcgDelineator().run(Signal(np.zeros(2500), FS))

    assert result.beats == []
    assert [window.start for window in result.windows] == [0, 750, 1500, 2250]
    assert result.windows[-1].length == 250


@pytest.mark.parametrize("length", [0, 4, -3])
def test_fixed_filter_length_must_be_positive_odd(length: int) -> None:
    with pytest.raises(InvalidGeometryError):
        IcgDelineator(filter_length=length)


def test_result_serialises_to_json(clean_corpus, physiological_params) -> None:
    result = IcgDelineator(physiological_params).run(clean_corpus[0].signal)

    restored = DelineationResult.from_json(result.to_json())

    assert restored.beats == result.beats
    assert restored.windows == result.windows
    assert restored.mean_filter_length == pytest.approx(result.mean_filter_length)


def test_window_throughput(noisy_corpus, physiological_params) -> None:
    delineator = IcgDelineator(physiological_params)
    signal = noisy_corpus[0].signal
    best = float("inf")
    for _ in range(5):
        started = time.perf_counter()
        result = delineator.run(signal)
        best = min(best, (time.perf_counter() - started) / len(result.windows))

    assert best < 0.03

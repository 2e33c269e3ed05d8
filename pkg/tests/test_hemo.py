import pytest

from icgscan.core import BeatAnnotation
from icgscan.hemo import HEMO_FIELDS, compute_hemo


def build_beat(c: int, **overrides) -> BeatAnnotation:
    data = {
        "b": c - 15,
        "c": c,
        "x": c + 71,
        "o": c + 93,
        "amp_b": 0.1,
        "amp_c": 1.1,
        "amp_x": -0.4,
        "amp_o": 0.3,
    }
    data.update(overrides)
    return BeatAnnotation(**data)


def test_intervals_heart_rate_and_amplitude() -> None:
    params = compute_hemo([build_beat(100), build_beat(350)], 250.0)

    first = params[0]
    assert first.cc_time == pytest.approx(1000.0)
    assert first.hr == pytest.approx(60.0)
    assert first.lvet == pytest.approx(344.0)
    assert first.ivrt == pytest.approx(88.0)
    assert first.bc_ampl == pytest.approx(1.0)


def test_last_beat_has_no_cc_time_or_heart_rate() -> None:
    params = compute_hemo([build_beat(100), build_beat(300)], 250.0)

    assert params[0].cc_time == pytest.approx(800.0)
    assert params[0].hr == pytest.approx(75.0)
    assert params[-1].cc_time is None
    assert params[-1].hr is None
    assert params[-1].lvet is not None


def test_missing_points_leave_dependent_fields_absent() -> None:
    beat = build_beat(100, b=None, amp_b=None, o=None, amp_o=None)

    params = compute_hemo([beat], 500.0)[0]

    assert params.lvet is None
    assert params.bc_ampl is None
    assert params.ivrt is None
    assert set(params.to_dict()) == set(HEMO_FIELDS)


def test_empty_beat_list() -> None:
    assert compute_hemo([], 250.0) == []

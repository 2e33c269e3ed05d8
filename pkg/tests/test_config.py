import pytest
from pydantic import ValidationError

from icgscan.config import (
    DEFAULT_CONFIG,
    Config,
    build_params,
    load_grid,
    load_params,
    load_synth_spec,
    parse_params_text,
)
from icgscan.core import ConfigFileError, DelineationParams


def test_missing_config_file_falls_back_to_defaults(tmp_path) -> None:
    config = Config(str(tmp_path / "home"))

    assert config.get("evaluation", "tolerance_ms") == DEFAULT_CONFIG["evaluation"]["tolerance_ms"]
    assert config.get("nope", "missing", "fallback") == "fallback"
    assert not (tmp_path / "home").exists()
    assert config.delineation_params() == DelineationParams.physiological()
    assert config.delineation_params("default") == DelineationParams()


def test_set_persists_across_instances(tmp_path) -> None:
    config = Config(str(tmp_path))
    config.set("delineation", "preset", "physiological")
    config.set("delineation", "overrides", {"b_slope1": 0.2})

    reloaded = Config(str(tmp_path))

    assert reloaded.get("delineation", "preset") == "physiological"
    assert reloaded.get("synth", "fs") == 250.0
    params = reloaded.delineation_params()
    assert params.cx_min_ms == 150.0
    assert params.b_slope1 == 0.2


def test_bad_stored_overrides_name_the_config_file(tmp_path) -> None:
    config = Config(str(tmp_path))
    config.set("delineation", "overrides", {"a_frac": 3})

    with pytest.raises(ConfigFileError, match="config.yaml"):
        config.delineation_params()


def test_build_params_presets() -> None:
    assert build_params() == DelineationParams()
    assert build_params("physiological", {"xo_max_ms": 120}).xo_max_ms == 120
    with pytest.raises(ConfigFileError):
        build_params("aggressive")
    with pytest.raises(ValidationError):
        build_params("default", {"sg_len_start": 4})


def test_parse_params_text_accepts_both_separators_and_comments() -> None:
    values = parse_params_text("# tuned\nsnr_thr = 25\nb_slope1: 0.09  # steeper\n\nsg_len_max=41\n")

    assert values == {"snr_thr": 25, "b_slope1": 0.09, "sg_len_max": 41}
    with pytest.raises(ConfigFileError, match="params.txt:1"):
        parse_params_text("just words\n", "params.txt")


def test_load_params_applies_preset_then_values(tmp_path) -> None:
    path = tmp_path / "params.txt"
    path.write_text("preset = physiological\nxo_max_ms = 120\n")

    params = load_params(path)

    assert params.cx_max_ms == 300.0
    assert params.xo_max_ms == 120.0


def test_load_params_rejects_unknown_keys_and_bad_values(tmp_path) -> None:
    unknown = tmp_path / "unknown.txt"
    unknown.write_text("snr_thr = 25\nwindow_length = 5\n")
    invalid = tmp_path / "invalid.txt"
    invalid.write_text("a_frac = 2\n")

    with pytest.raises(ConfigFileError, match="window_length"):
        load_params(unknown)
    with pytest.raises(ConfigFileError, match="invalid.txt"):
        load_params(invalid)
    with pytest.raises(ConfigFileError):
        load_params(tmp_path / "absent.txt")


def test_load_grid_wraps_scalars(tmp_path) -> None:
    path = tmp_path / "grid.yaml"
    path.write_text("b_slope1: [0.09, 0.11]\nsnr_thr: 30\n")

    assert load_grid(path) == {"b_slope1": [0.09, 0.11], "snr_thr": [30]}


def test_load_synth_spec(tmp_path) -> None:
    good = tmp_path / "beat.yaml"
    good.write_text(
        "morphology: b-notch\nhr_bpm: 70\nnoise:\n  - kind: white\n    sigma: 0.05\n"
    )
    bad = tmp_path / "bad.yaml"
    bad.write_text("morphology: square\n")
    listing = tmp_path / "list.yaml"
    listing.write_text("- 1\n- 2\n")

    spec = load_synth_spec(good)
    assert spec.morphology == "b-notch"
    assert spec.noise[0].sigma == 0.05
    with pytest.raises(ConfigFileError, match="bad.yaml"):
        load_synth_spec(bad)
    with pytest.raises(ConfigFileError, match="mapping"):
        load_synth_spec(listing)

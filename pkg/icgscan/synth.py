"""
Synthetic ICG generator
~~~~~~~~~~~~~~~~~~~~~~~

Beat trains assembled from piecewise templates (raised-cosine segments and linear
ramps) with the B/C/X/O locations planted at knot positions, plus optional white
noise, sinusoidal interference and baseline drift. Every planted point is checked
on the clean waveform before a record is returned.
"""

import logging
from dataclasses import dataclass
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .core import (
    BeatAnnotation,
    DelineationParams,
    InfeasibleSpecError,
    Signal,
    ms_to_samples,
    signed_ms_to_samples,
)
from .utils import is_local_max, is_local_min

logger = logging.getLogger(__name__)

Morphology = Literal["b-local-min", "b-notch", "x-local-min-only"]
MORPHOLOGIES: Tuple[str, ...] = ("b-local-min", "b-notch", "x-local-min-only")

# B placement before C per morphology, ms
DEFAULT_B_OFFSET_MS = {
    "b-local-min": -60.0,
    "b-notch": -64.0,
    "x-local-min-only": -52.0,
}

FIRST_BEAT_MS = 500.0


class NoiseSpec(BaseModel):
    """One additive noise component; sigma and amplitude are fractions of c_ampl."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["white", "sinusoid", "baseline-drift"]
    sigma: float = Field(default=0.0, ge=0)
    freq_hz: float = Field(default=0.25, gt=0)
    amplitude: float = Field(default=0.0, ge=0)


class SyntheticBeatSpec(BaseModel):
    """Beat recipe. Offsets are relative to C in ms (B negative); None picks a placement inside the active windows."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    morphology: Morphology = "b-local-min"
    hr_bpm: float = Field(default=60.0, gt=0)
    c_ampl: float = Field(default=1.0, gt=0)
    b_offset_ms: Optional[float] = None
    x_offset_ms: Optional[float] = None
    o_offset_ms: Optional[float] = None
    noise: List[NoiseSpec] = Field(default_factory=list)

    def resolved_offsets(self, params: DelineationParams) -> Tuple[float, float, float]:
        b_ms = self.b_offset_ms if self.b_offset_ms is not None else DEFAULT_B_OFFSET_MS[self.morphology]
        x_ms = self.x_offset_ms
        if x_ms is None:
            x_ms = (params.cx_min_ms + params.cx_max_ms) / 2.0
        o_ms = self.o_offset_ms
        if o_ms is None:
            o_ms = x_ms + (params.xo_min_ms + params.xo_max_ms) / 2.0
            o_ms = min(max(o_ms, params.co_min_ms), params.co_max_ms)
        return b_ms, x_ms, o_ms


@dataclass
class GroundTruthRecord:
    """Signal plus the beats planted in it (or annotated by hand, for loaded records)."""

    signal: Signal
    beats: List[BeatAnnotation]
    name: str = ""
    spec: Optional[SyntheticBeatSpec] = None
    seed: Optional[int] = None


# (offset ms relative to C, value relative to c_ampl, shape of the segment ending here)
Knot = Tuple[float, float, str]


def _template_knots(morphology: str, b: float, x: float, o: float) -> List[Knot]:
    if morphology == "b-local-min":
        return [
            (b - 100.0, 0.0, "cos"),
            (b - 50.0, 0.25, "cos"),
            (b, 0.12, "cos"),
            (0.0, 1.0, "cos"),
            (x, -0.45, "cos"),
            (o, 0.35, "cos"),
            (o + 160.0, 0.0, "cos"),
        ]
    if morphology == "b-notch":
        return [
            (b - 90.0, 0.0, "cos"),
            (b - 12.0, 0.30, "cos"),
            (b, 0.24, "cos"),
            (0.0, 1.0, "cos"),
            (x, -0.45, "cos"),
            (o, 0.35, "cos"),
            (o + 160.0, 0.0, "cos"),
        ]
    # x-local-min-only: B is a slope break, X sits above a deeper later trough
    return [
        (b - 40.0, 0.0, "lin"),
        (b - 12.0, 0.0, "lin"),
        (b, 0.48, "lin"),
        (0.0, 1.0, "lin"),
        (x, -0.10, "cos"),
        (o, 0.35, "cos"),
        (o + 200.0, -0.45, "cos"),
        (o + 300.0, 0.0, "cos"),
    ]


def _render_template(knots: Sequence[Tuple[int, float, str]]) -> Tuple[int, np.ndarray]:
    first = knots[0][0]
    values = np.zeros(knots[-1][0] - first + 1)
    values[0] = knots[0][1]
    for (k0, v0, _), (k1, v1, shape) in zip(knots, knots[1:]):
        t = np.arange(1, k1 - k0 + 1) / (k1 - k0)
        ramp = t if shape == "lin" else 0.5 * (1.0 - np.cos(np.pi * t))
        values[k0 - first + 1:k1 - first + 1] = v0 + (v1 - v0) * ramp
    return first, values


def _placement_samples(
    b_ms: float, x_ms: float, o_ms: float, fs: float, hr_bpm: float, params: DelineationParams
) -> Tuple[int, int, int]:
    b_s = signed_ms_to_samples(b_ms, fs)
    x_s = signed_ms_to_samples(x_ms, fs)
    o_s = signed_ms_to_samples(o_ms, fs)

    problems = []
    if not b_s < 0 < x_s < o_s:
        problems.append(f"ordering b<c<x<o violated by offsets ({b_s}, 0, {x_s}, {o_s}) samples")
    if -b_s >= ms_to_samples(params.b_window_ms, fs):
        problems.append(f"B offset {b_ms} ms is not inside the {params.b_window_ms} ms B window")
    if not ms_to_samples(params.cx_min_ms, fs) <= x_s <= ms_to_samples(params.cx_max_ms, fs):
        problems.append(f"X offset {x_ms} ms outside [{params.cx_min_ms}, {params.cx_max_ms}] ms")
    if not ms_to_samples(params.co_min_ms, fs) <= o_s <= ms_to_samples(params.co_max_ms, fs):
        problems.append(f"O offset {o_ms} ms outside [{params.co_min_ms}, {params.co_max_ms}] ms")
    gap_ms = (o_s - x_s) * 1000.0 / fs
    if not params.xo_min_ms <= gap_ms <= params.xo_max_ms:
        problems.append(f"X-O gap {gap_ms:.1f} ms outside [{params.xo_min_ms}, {params.xo_max_ms}] ms")
    if o_s > 0.5 * 60.0 * fs / hr_bpm:
        problems.append("O falls in the second half of the C-C interval")
    if problems:
        raise InfeasibleSpecError("; ".join(problems))
    return b_s, x_s, o_s


def _self_check(
    clean: np.ndarray, centers: Sequence[int], offsets: Tuple[int, int, int], spec: SyntheticBeatSpec
) -> None:
    b_s, x_s, o_s = offsets
    for c in centers:
        b, x, o = c + b_s, c + x_s, c + o_s
        failures = []
        if not is_local_max(clean, c):
            failures.append("C is not a local maximum")
        if spec.morphology == "x-local-min-only":
            before = clean[b] - clean[b - 1]
            after = clean[b + 1] - clean[b]
            if is_local_min(clean, b) or abs(after - before) <= 1e-9 * spec.c_ampl:
                failures.append("B is not a slope break")
        elif not is_local_min(clean, b):
            failures.append("B is not a local minimum")
        if not is_local_min(clean, x):
            failures.append("X is not a local minimum")
        if not is_local_max(clean, o):
            failures.append("O is not a local maximum")
        if failures:
            raise InfeasibleSpecError(f"planted beat at C={c}: {', '.join(failures)}")


def _noise(spec: SyntheticBeatSpec, n: int, fs: float, rng: np.random.Generator) -> np.ndarray:
    total = np.zeros(n)
    t = np.arange(n) / fs
    for component in spec.noise:
        if component.kind == "white":
            total += rng.normal(0.0, component.sigma * spec.c_ampl, n)
        else:
            phase = rng.uniform(0.0, 2.0 * np.pi)
            total += component.amplitude * spec.c_ampl * np.sin(2.0 * np.pi * component.freq_hz * t + phase)
    return total


def generate(
    spec: SyntheticBeatSpec,
    duration_s: float,
    fs: float,
    seed: int = 0,
    params: Optional[DelineationParams] = None,
) -> GroundTruthRecord:
    """
    Build one synthetic record with planted ground truth.

    Args:
        spec: beat recipe
        duration_s: record length, at least 3 s
        fs: sampling rate, at least 100 Hz
        seed: noise seed; equal seeds give bit-identical records
        params: detector configuration the placements must be consistent with

    Raises:
        InfeasibleSpecError: placements violate ordering or search windows, or a
            planted point is not a genuine feature of the generated waveform
    """
    params = params or DelineationParams()
    if duration_s < 3.0:
        raise InfeasibleSpecError(f"duration must be at least 3 s, got {duration_s}")
    if fs < 100.0:
        raise InfeasibleSpecError(f"sampling rate must be at least 100 Hz, got {fs}")

    b_ms, x_ms, o_ms = spec.resolved_offsets(params)
    offsets = _placement_samples(b_ms, x_ms, o_ms, fs, spec.hr_bpm, params)

    knots = [
        (signed_ms_to_samples(t_ms, fs), value, shape)
        for t_ms, value, shape in _template_knots(spec.morphology, b_ms, x_ms, o_ms)
    ]
    if any(later[0] <= earlier[0] for earlier, later in zip(knots, knots[1:])):
        raise InfeasibleSpecError(f"template knots collapse at fs={fs}: {[k[0] for k in knots]}")
    first, template = _render_template(knots)
    last = knots[-1][0]

    period = 60.0 * fs / spec.hr_bpm
    if last - first + 1 >= period:
        raise InfeasibleSpecError(
            f"beat template spans {last - first + 1} samples but the beat period is {period:.1f}"
        )

    n = int(round(duration_s * fs))
    c0 = max(ms_to_samples(FIRST_BEAT_MS, fs), -first + 1)
    centers: List[int] = []
    k = 0
    while True:
        c = c0 + int(round(k * period))
        if c + last >= n:
            break
        centers.append(c)
        k += 1

    clean = np.zeros(n)
    for c in centers:
        clean[c + first:c + last + 1] = spec.c_ampl * template
    _self_check(clean, centers, offsets, spec)

    rng = np.random.default_rng(seed)
    samples = clean + _noise(spec, n, fs, rng)
    b_s, x_s, o_s = offsets
    beats = [
        BeatAnnotation(b=c + b_s, c=c, x=c + x_s, o=c + o_s).with_amplitudes(samples) for c in centers
    ]
    logger.debug(f"synthesised {len(beats)} {spec.morphology} beats over {duration_s}s at {fs} Hz")
    return GroundTruthRecord(signal=Signal(samples, fs), beats=beats, spec=spec, seed=seed)


def build_corpus(
    morphologies: Sequence[str] = MORPHOLOGIES,
    records_per_morphology: int = 10,
    duration_s: float = 30.0,
    fs: float = 250.0,
    noise: Sequence[NoiseSpec] = (),
    params: Optional[DelineationParams] = None,
    seed: int = 0,
    hr_bpm: float = 60.0,
    hr_step_bpm: float = 0.0,
) -> List[GroundTruthRecord]:
    """Records for each morphology; record r runs at hr_bpm + hr_step_bpm * (r % 3)."""

    corpus: List[GroundTruthRecord] = []
    for m_index, morphology in enumerate(morphologies):
        for r in range(records_per_morphology):
            spec = SyntheticBeatSpec(
                morphology=morphology,
                hr_bpm=hr_bpm + hr_step_bpm * (r % 3),
                noise=list(noise),
            )
            record_seed = seed + 1000 * m_index + r
            record = generate(spec, duration_s, fs, seed=record_seed, params=params)
            record.name = f"{morphology}-{r:02d}"
            corpus.append(record)
    return corpus

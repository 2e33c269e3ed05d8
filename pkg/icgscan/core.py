"""
Core domain module
~~~~~~~~~~~~~~~~~~

Shared types for ICG delineation: signals, window bookkeeping, beat annotations,
the tunable parameter set and unit conversions between milliseconds and samples.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

POINT_TYPES: Tuple[str, ...] = ("b", "c", "x", "o")


class DelineationError(ValueError):
    """Base class for every domain error raised by icgscan."""


class InvalidGeometryError(DelineationError):
    """Savitzky-Golay length/order combination cannot form a kernel."""


class SignalTooShortError(DelineationError):
    """Input is shorter than the kernel or window that consumes it."""


class CutoffAboveNyquistError(DelineationError):
    """Band-split cutoff is not below fs/2."""


class WindowOutOfRangeError(DelineationError):
    """A search window would start before the record."""


class InfeasibleSpecError(DelineationError):
    """Synthetic beat placements violate ordering or detector windows."""


class EmptyGridError(DelineationError):
    """Calibration grid has no points to evaluate."""


class TooShortRecordError(DelineationError):
    """Record is shorter than one delineation window."""


class AnnotationFormatError(DelineationError):
    """Signal or annotation file could not be parsed."""


class SamplingRateRequiredError(DelineationError):
    """Single-column input given without a sampling rate."""


class ConfigFileError(DelineationError):
    """Parameters, grid or synth spec file could not be used."""


def ms_to_samples(t_ms: float, fs: float) -> int:
    """Convert a duration in milliseconds to a sample count, round(t * fs / 1000)."""

    if t_ms < 0:
        raise ValueError(f"duration must be non-negative, got {t_ms} ms")
    if fs <= 0:
        raise ValueError(f"sampling rate must be positive, got {fs} Hz")
    return int(round(t_ms * fs / 1000.0))


def samples_to_ms(n_samples: float, fs: float) -> float:
    if fs <= 0:
        raise ValueError(f"sampling rate must be positive, got {fs} Hz")
    return n_samples * 1000.0 / fs


def signed_ms_to_samples(t_ms: float, fs: float) -> int:
    """ms_to_samples for offsets that may point backwards in time."""

    magnitude = ms_to_samples(abs(t_ms), fs)
    return -magnitude if t_ms < 0 else magnitude


@dataclass(frozen=True, eq=False)
class Signal:
    """Uniformly sampled dZ/dt waveform."""

    samples: np.ndarray
    fs: float

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1:
            raise ValueError("signal samples must be one-dimensional")
        if not self.fs > 0:
            raise ValueError(f"sampling rate must be positive, got {self.fs} Hz")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "fs", float(self.fs))

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration_s(self) -> float:
        return len(self) / self.fs

    def times(self) -> np.ndarray:
        return np.arange(len(self)) / self.fs

    def slice(self, start: int, stop: int) -> "Signal":
        return Signal(self.samples[start:stop], self.fs)

    def with_samples(self, samples: np.ndarray) -> "Signal":
        return Signal(samples, self.fs)


@dataclass(frozen=True)
class WindowSegment:
    """One processing window, addressed in the parent record's sample indices."""

    start: int
    length: int

    @property
    def stop(self) -> int:
        return self.start + self.length


@dataclass(frozen=True)
class BeatAnnotation:
    """B/C/X/O locations of one beat (absolute sample indices) and the amplitudes there."""

    b: Optional[int] = None
    c: Optional[int] = None
    x: Optional[int] = None
    o: Optional[int] = None
    amp_b: Optional[float] = None
    amp_c: Optional[float] = None
    amp_x: Optional[float] = None
    amp_o: Optional[float] = None

    def __post_init__(self) -> None:
        present = [index for index in self.indices() if index is not None]
        if any(later <= earlier for earlier, later in zip(present, present[1:])):
            raise ValueError(f"beat points out of order: {self.points()}")

    def indices(self) -> Tuple[Optional[int], ...]:
        return (self.b, self.c, self.x, self.o)

    def points(self) -> Dict[str, Optional[int]]:
        return dict(zip(POINT_TYPES, self.indices()))

    def point(self, name: str) -> Optional[int]:
        return self.points()[name]

    def amplitude(self, name: str) -> Optional[float]:
        return getattr(self, f"amp_{name}")

    @property
    def is_complete(self) -> bool:
        return all(index is not None for index in self.indices())

    def with_amplitudes(self, samples: Sequence[float]) -> "BeatAnnotation":
        """Return a copy whose amplitudes are read from `samples` at the beat's indices."""

        values: Dict[str, Any] = self.points()
        for name, index in self.points().items():
            values[f"amp_{name}"] = float(samples[index]) if index is not None else None
        return BeatAnnotation(**values)

    def shifted(self, offset: int) -> "BeatAnnotation":
        values: Dict[str, Any] = {
            name: (index + offset if index is not None else None)
            for name, index in self.points().items()
        }
        for name in POINT_TYPES:
            values[f"amp_{name}"] = self.amplitude(name)
        return BeatAnnotation(**values)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = self.points()
        for name in POINT_TYPES:
            data[f"amp_{name}"] = self.amplitude(name)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BeatAnnotation":
        return cls(**{key: value for key, value in data.items() if key in cls.__dataclass_fields__})


def point_series(beats: Sequence[BeatAnnotation], name: str) -> List[int]:
    """Indices of one point type across beats, absent points skipped."""

    return [index for index in (beat.point(name) for beat in beats) if index is not None]


class DelineationParams(BaseModel):
    """Every tunable constant of the delineation chain, in physical units."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    # adaptive Savitzky-Golay filter
    snr_thr: float = Field(default=30.0, gt=0)
    snr_impr_thr: float = Field(default=0.01, ge=0)
    snr_cutoff_hz: float = Field(default=20.0, gt=0)
    sg_order: int = Field(default=3, ge=0)
    sg_len_start: int = Field(default=3, ge=1)
    sg_len_step: int = Field(default=2, gt=0)
    sg_len_max: int = Field(default=31, ge=1)

    # relative energy and C peaks
    relen_long_ms: float = Field(default=950.0, gt=0)
    relen_short_ms: float = Field(default=140.0, gt=0)
    thr_max_frac: float = Field(default=0.2, gt=0)
    thr_min_frac: float = Field(default=0.02, ge=0)
    max_val_factor: float = Field(default=2.0, gt=0)
    merge_interval_s: float = Field(default=0.25, gt=0)
    cc_valid_factor: float = Field(default=1.7, gt=0)
    cc_history: int = Field(default=5, ge=1)
    peak_radius: int = Field(default=2, ge=1)
    c_floor_frac: float = Field(default=0.5, ge=0, lt=1)

    # B point
    b_window_ms: float = Field(default=80.0, gt=0)
    a_frac: float = Field(default=0.5, gt=0, lt=1)
    b_slope1: float = Field(default=0.11, gt=0)
    b_slope2: float = Field(default=0.08, gt=0)
    slope_step_ms: float = Field(default=4.0, gt=0)

    # X and O points
    co_min_ms: float = Field(default=20.0, ge=0)
    co_max_ms: float = Field(default=40.0, gt=0)
    cx_min_ms: float = Field(default=15.0, ge=0)
    cx_max_ms: float = Field(default=30.0, gt=0)
    xo_min_ms: float = Field(default=2.0, ge=0)
    xo_max_ms: float = Field(default=15.0, gt=0)
    xo_max_minima: int = Field(default=3, ge=1)

    # window chaining
    window_s: float = Field(default=3.0, gt=0)
    min_window_s: float = Field(default=1.0, gt=0)
    seam_overlap_s: float = Field(default=0.5, ge=0)
    seam_anchor_s: float = Field(default=0.25, gt=0)

    @model_validator(mode="after")
    def _check_geometry(self) -> "DelineationParams":
        if self.sg_len_start % 2 == 0:
            raise ValueError("sg_len_start must be odd")
        if self.sg_len_step % 2 != 0:
            raise ValueError("sg_len_step must be even")
        if self.sg_len_max % 2 == 0 or self.sg_len_max <= self.sg_order:
            raise ValueError("sg_len_max must be odd and greater than sg_order")
        if self.sg_len_max < self.sg_len_start:
            raise ValueError("sg_len_max must not be below sg_len_start")
        for low, high in (
            ("thr_min_frac", "thr_max_frac"),
            ("co_min_ms", "co_max_ms"),
            ("cx_min_ms", "cx_max_ms"),
            ("xo_min_ms", "xo_max_ms"),
            ("relen_short_ms", "relen_long_ms"),
            ("min_window_s", "window_s"),
        ):
            if getattr(self, low) >= getattr(self, high):
                raise ValueError(f"{low} must be smaller than {high}")
        if self.seam_overlap_s >= self.window_s:
            raise ValueError("seam_overlap_s must be smaller than window_s")
        return self

    @classmethod
    def physiological(cls, **overrides: Any) -> "DelineationParams":
        """X/O windows read in units ten times larger (CX 150-300 ms, CO 200-400 ms, X-O 20-150 ms)."""

        base = cls()
        values: Dict[str, Any] = {
            name: getattr(base, name) * 10
            for name in ("co_min_ms", "co_max_ms", "cx_min_ms", "cx_max_ms", "xo_min_ms", "xo_max_ms")
        }
        values.update(overrides)
        return cls(**values)

    def with_overrides(self, **overrides: Any) -> "DelineationParams":
        """Validated copy with some fields replaced."""

        data = self.model_dump()
        data.update(overrides)
        return type(self)(**data)

    def reach_samples(self, fs: float) -> int:
        """How far past C the X/O search looks."""

        return ms_to_samples(max(self.co_max_ms, self.cx_max_ms), fs)


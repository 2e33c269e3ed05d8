"""
Delineation pipeline module
~~~~~~~~~~~~~~~~~~~~~~~~~~~

Streams a record through 3 s windows: filter, enhance, pick C peaks, locate B/X/O
around each C and start the next window at the last O found.
"""

import json
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Deque, Dict, List, Optional, Tuple

import numpy as np

from .bxo import detect_b, detect_xo
from .cdetect import detect_c_peaks, relative_energy
from .core import (
    BeatAnnotation,
    DelineationParams,
    InvalidGeometryError,
    Signal,
    TooShortRecordError,
    WindowOutOfRangeError,
    WindowSegment,
    ms_to_samples,
)
from .sgfilter import fixed_filter, run_adaptive_filter

logger = logging.getLogger(__name__)


@dataclass
class PipelineState:
    """Everything carried from one window to the next."""

    next_window_start: int = 0
    cc_history: Deque[float] = field(default_factory=lambda: deque(maxlen=5))
    c_amplitudes: Deque[float] = field(default_factory=lambda: deque(maxlen=5))
    beats: List[BeatAnnotation] = field(default_factory=list)

    @property
    def last_c(self) -> Optional[int]:
        return self.beats[-1].c if self.beats else None

    def mean_cc_s(self) -> Optional[float]:
        return float(np.mean(self.cc_history)) if self.cc_history else None

    def mean_c_ampl(self) -> Optional[float]:
        return float(np.mean(self.c_amplitudes)) if self.c_amplitudes else None

    def accept(self, beat: BeatAnnotation, fs: float, c_ampl: float) -> None:
        if self.last_c is not None:
            self.cc_history.append((beat.c - self.last_c) / fs)
        self.c_amplitudes.append(c_ampl)
        self.beats.append(beat)


@dataclass
class DelineationResult:
    """Beats found in one record plus per-window bookkeeping."""

    fs: float
    beats: List[BeatAnnotation] = field(default_factory=list)
    windows: List[WindowSegment] = field(default_factory=list)
    filter_lengths: List[int] = field(default_factory=list)

    @property
    def mean_filter_length(self) -> Optional[float]:
        if not self.filter_lengths:
            return None
        return float(np.mean(self.filter_lengths))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "fs": self.fs,
            "beats": [beat.to_dict() for beat in self.beats],
            "windows": [{"start": w.start, "length": w.length} for w in self.windows],
            "filter_lengths": list(self.filter_lengths),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DelineationResult":
        return cls(
            fs=data["fs"],
            beats=[BeatAnnotation.from_dict(beat) for beat in data.get("beats", [])],
            windows=[WindowSegment(**window) for window in data.get("windows", [])],
            filter_lengths=list(data.get("filter_lengths", [])),
        )

    @classmethod
    def from_json(cls, json_str: str) -> "DelineationResult":
        return cls.from_dict(json.loads(json_str))


class IcgDelineator:
    """Beat-to-beat B/C/X/O delineation over a whole record."""

    def __init__(self, params: Optional[DelineationParams] = None, filter_length: Optional[int] = None):
        """
        Args:
            params: delineation parameters, defaults when omitted
            filter_length: fixed SG length; None selects the length adaptively per window
        """
        self.params = params or DelineationParams()
        if filter_length is not None and (filter_length < 1 or filter_length % 2 == 0):
            raise InvalidGeometryError(f"fixed filter length must be a positive odd integer, got {filter_length}")
        self.filter_length = filter_length

    def _filter(self, window: Signal) -> Tuple[Signal, int]:
        if self.filter_length is None:
            outcome = run_adaptive_filter(window, self.params)
            return outcome.signal, outcome.length
        return fixed_filter(window, self.filter_length, self.params.sg_order), self.filter_length

    def _delineate_window(
        self, record: Signal, segment: WindowSegment, state: PipelineState, is_last: bool
    ) -> Tuple[List[BeatAnnotation], int, int, Optional[int]]:
        """
        Emit the beats of one window into `state`.

        Returns:
            (beats, C count, filter length, absolute index of the deferred C or None)
        """

        params = self.params
        fs = record.fs
        filtered, length = self._filter(record.slice(segment.start, segment.stop))
        trace = relative_energy(filtered, params.relen_long_ms, params.relen_short_ms)

        last_c = state.last_c - segment.start if state.last_c is not None else None
        peaks = detect_c_peaks(
            filtered,
            trace,
            params,
            prior_intervals=list(state.cc_history),
            last_c=last_c,
            recent_c_ampl=state.mean_c_ampl(),
        )
        positions = [int(p) for p in peaks.positions]
        reach = params.reach_samples(fs)

        emitted: List[BeatAnnotation] = []
        deferred: Optional[int] = None
        for k, p in enumerate(positions):
            if not is_last and p + reach > segment.length - 2:
                deferred = segment.start + p
                logger.debug(f"C at {deferred} deferred: X/O search runs past the window")
                break

            c_ampl = float(filtered.samples[p])
            try:
                b = detect_b(filtered, p, c_ampl, params)
            except WindowOutOfRangeError:
                logger.debug(f"C at {segment.start + p}: B window precedes the window start")
                b = None

            next_c = positions[k + 1] if k + 1 < len(positions) else None
            xo = detect_xo(filtered, p, params, next_c=next_c, mean_cc_s=state.mean_cc_s())
            x, o = xo if xo is not None else (None, None)

            beat = BeatAnnotation(
                b=None if b is None else segment.start + b,
                c=segment.start + p,
                x=None if x is None else segment.start + x,
                o=None if o is None else segment.start + o,
            ).with_amplitudes(record.samples)
            state.accept(beat, fs, c_ampl)
            emitted.append(beat)

        return emitted, len(positions), length, deferred

    def next_start(
        self,
        segment: WindowSegment,
        emitted: List[BeatAnnotation],
        c_count: int,
        fs: float,
        deferred_c: Optional[int] = None,
    ) -> int:
        """
        Where the window after `segment` begins.

        The last emitted O wins. Otherwise a deferred C is re-entered with its B window
        and the filter edge in front of it, then the last C plus seam_anchor_s, then the
        seam limit when C peaks were seen, else a full window forward.
        """

        params = self.params
        window = ms_to_samples(params.window_s * 1000.0, fs)
        seam_limit = segment.start + window - ms_to_samples(params.seam_overlap_s * 1000.0, fs)

        anchors = [beat.o for beat in emitted if beat.o is not None]
        if anchors:
            next_start = anchors[-1]
        elif deferred_c is not None:
            next_start = deferred_c - 2 * ms_to_samples(params.b_window_ms, fs)
        elif emitted:
            logger.debug(f"window at {segment.start}: no O found, anchoring on the last C")
            next_start = min(emitted[-1].c + ms_to_samples(params.seam_anchor_s * 1000.0, fs), seam_limit)
        elif c_count:
            next_start = seam_limit
        else:
            logger.debug(f"window at {segment.start}: no C peaks, advancing a full window")
            next_start = segment.start + window
        return max(next_start, segment.start + 1)

    def run(self, signal: Signal) -> DelineationResult:
        """
        Delineate every beat of `signal`.

        Raises:
            TooShortRecordError: the record is shorter than one window
        """
        params = self.params
        fs = signal.fs
        n = len(signal)
        window = ms_to_samples(params.window_s * 1000.0, fs)
        minimum = ms_to_samples(params.min_window_s * 1000.0, fs)
        if n < window:
            raise TooShortRecordError(
                f"record of {n} samples ({signal.duration_s:.2f} s) is shorter than one {params.window_s} s window"
            )

        state = PipelineState(
            cc_history=deque(maxlen=params.cc_history), c_amplitudes=deque(maxlen=params.cc_history)
        )
        result = DelineationResult(fs=fs)

        while True:
            start = state.next_window_start
            length = min(window, n - start)
            if length < minimum:
                logger.debug(f"trailing {length} samples dropped")
                break

            segment = WindowSegment(start, length)
            is_last = segment.stop >= n
            emitted, c_count, filter_length, deferred = self._delineate_window(signal, segment, state, is_last)
            result.windows.append(segment)
            result.filter_lengths.append(filter_length)

            if is_last:
                logger.debug(f"window [{start}, {segment.stop}) L={filter_length} C={c_count} (last)")
                break
            state.next_window_start = self.next_start(segment, emitted, c_count, fs, deferred)
            logger.debug(
                f"window [{start}, {segment.stop}) L={filter_length} C={c_count} "
                f"emitted={len(emitted)} next={state.next_window_start}"
            )

        result.beats = list(state.beats)
        logger.debug(f"delineated {len(result.beats)} beats in {len(result.windows)} windows")
        return result


def run_pipeline(
    signal: Signal, params: Optional[DelineationParams] = None, filter_length: Optional[int] = None
) -> List[BeatAnnotation]:
    """All beats of `signal` in time order."""

    return IcgDelineator(params, filter_length).run(signal).beats

"""
C peak detection module
~~~~~~~~~~~~~~~~~~~~~~~

Relative-energy enhancement followed by dual-threshold active-region peak picking,
merging of close candidates and the C-C interval validity check.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.ndimage import correlate1d
from scipy.signal import find_peaks

from .core import DelineationParams, Signal, SignalTooShortError, ms_to_samples
from .utils import is_local_peak

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RelEnTrace:
    """xre[n] = c_coeff[n] * signal[n]."""

    xre: np.ndarray
    c_coeff: np.ndarray


@dataclass(frozen=True, eq=False)
class CPeakList:
    positions: np.ndarray
    amplitudes: np.ndarray

    def __len__(self) -> int:
        return int(self.positions.size)

    @classmethod
    def empty(cls) -> "CPeakList":
        return cls(np.zeros(0, dtype=int), np.zeros(0, dtype=float))


def _centered_mean(values: np.ndarray, width: int) -> np.ndarray:
    """Mean over an odd centered window, truncated at the array edges."""

    ones = np.ones(2 * (width // 2) + 1)
    sums = correlate1d(values, ones, mode="constant", cval=0.0)
    counts = correlate1d(np.ones_like(values), ones, mode="constant", cval=0.0)
    return sums / counts


def relative_energy(signal: Signal, long_ms: float = 950.0, short_ms: float = 140.0) -> RelEnTrace:
    """Per-sample ratio of short- to long-window mean-square energy, applied to the signal."""

    x = signal.samples
    long_width = ms_to_samples(long_ms, signal.fs)
    short_width = ms_to_samples(short_ms, signal.fs)
    if x.size < long_width:
        raise SignalTooShortError(
            f"relative energy needs {long_width} samples ({long_ms} ms), got {x.size}"
        )

    energy = x * x
    short_energy = _centered_mean(energy, short_width)
    long_energy = _centered_mean(energy, long_width)
    c_coeff = np.divide(
        short_energy, long_energy, out=np.zeros_like(short_energy), where=long_energy > 0
    )
    return RelEnTrace(xre=c_coeff * x, c_coeff=c_coeff)


def reference_amplitude(xre: np.ndarray, fs: float, params: DelineationParams) -> float:
    """Max_val: the second-highest xre peak when it stands clear of the mean, else the highest."""

    distance = max(1, ms_to_samples(params.merge_interval_s * 1000.0, fs))
    peaks, _ = find_peaks(xre, distance=distance)
    if peaks.size == 0:
        return float(np.max(xre)) if xre.size else 0.0

    heights = np.sort(xre[peaks])[::-1]
    if heights.size >= 2 and heights[1] > params.max_val_factor * float(np.mean(np.abs(xre))):
        return float(heights[1])
    return float(heights[0])


def active_regions(xre: np.ndarray, thr_max: float, thr_min: float) -> List[Tuple[int, int]]:
    """
    [start, stop) spans opened by an upward crossing of thr_max and closed at the
    first sample below thr_min. A window that starts above thr_max opens nothing
    until xre falls back and crosses again.
    """
    n = xre.size
    if n < 2:
        return []
    ups = np.flatnonzero((xre[1:] > thr_max) & (xre[:-1] <= thr_max)) + 1
    lows = np.flatnonzero(xre < thr_min)

    regions: List[Tuple[int, int]] = []
    stop = 0
    for start in ups:
        if start < stop:
            continue
        k = np.searchsorted(lows, start)
        stop = int(lows[k]) if k < lows.size else n
        regions.append((int(start), stop))
    return regions


def merge_close_candidates(
    candidates: Sequence[int], samples: np.ndarray, fs: float, interval_s: float
) -> List[int]:
    kept: List[int] = []
    for position in sorted(candidates):
        if kept and (position - kept[-1]) / fs < interval_s:
            if samples[position] > samples[kept[-1]]:
                logger.debug(f"merge: C candidate {kept[-1]} replaced by higher {position}")
                kept[-1] = position
            else:
                logger.debug(f"merge: C candidate {position} dropped next to {kept[-1]}")
            continue
        kept.append(position)
    return kept


def detect_c_peaks(
    signal: Signal,
    trace: RelEnTrace,
    params: DelineationParams,
    prior_intervals: Sequence[float] = (),
    last_c: Optional[int] = None,
    recent_c_ampl: Optional[float] = None,
) -> CPeakList:
    """
    Pick C peaks in one filtered window.

    Args:
        signal: filtered window
        trace: relative-energy trace computed from `signal`
        params: delineation parameters
        prior_intervals: previous accepted C-C intervals in seconds, oldest first
        last_c: previously accepted C, in this window's sample coordinates (may be negative)
        recent_c_ampl: mean filtered amplitude of the recently accepted C peaks; candidates
            below c_floor_frac of it are dropped

    Returns:
        surviving peaks in increasing order; empty when nothing qualifies
    """
    x = signal.samples
    xre = trace.xre
    if xre.size != x.size:
        raise ValueError("relative-energy trace does not match the signal length")

    max_val = reference_amplitude(xre, signal.fs, params)
    if max_val <= 0:
        return CPeakList.empty()
    thr_max = params.thr_max_frac * max_val
    thr_min = params.thr_min_frac * max_val

    candidates: List[int] = []
    for start, stop in active_regions(xre, thr_max, thr_min):
        position = start + int(np.argmax(x[start:stop]))
        if is_local_peak(x, position, params.peak_radius):
            candidates.append(position)
        else:
            logger.debug(f"region [{start}, {stop}) has no interior peak at {position}")

    merged = merge_close_candidates(candidates, x, signal.fs, params.merge_interval_s)
    if recent_c_ampl is not None and recent_c_ampl > 0:
        floor = params.c_floor_frac * recent_c_ampl
        faint = [position for position in merged if x[position] < floor]
        if faint:
            logger.debug(f"C candidates {faint} below the amplitude floor {floor:.4g}")
        merged = [position for position in merged if x[position] >= floor]

    history = list(prior_intervals)
    accepted: List[int] = []
    previous = last_c
    for position in merged:
        if previous is not None:
            if position <= previous:
                continue
            interval = (position - previous) / signal.fs
            if len(history) >= params.cc_history:
                limit = float(np.mean(history[-params.cc_history:])) / params.cc_valid_factor
                if interval < limit:
                    logger.debug(
                        f"C candidate {position} rejected: interval {interval:.3f}s < {limit:.3f}s"
                    )
                    continue
            history.append(interval)
        accepted.append(position)
        previous = position

    positions = np.asarray(accepted, dtype=int)
    return CPeakList(positions=positions, amplitudes=x[positions])

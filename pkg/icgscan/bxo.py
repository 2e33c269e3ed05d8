"""
B, X and O point detection
~~~~~~~~~~~~~~~~~~~~~~~~~~

B is searched backwards from the half-amplitude point of the C upstroke; X and O
are chosen as the feasible (local minimum, local maximum) pair after C with the
largest amplitude difference.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import DelineationParams, Signal, WindowOutOfRangeError, ms_to_samples
from .utils import is_local_min, local_maxima_mask, local_minima_mask

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SlopeTrace:
    """First differences of the C-normalised signal, expressed per slope_step_ms."""

    deriv: np.ndarray

    def at(self, i: int) -> float:
        """Slope arriving at sample i, i.e. s[i] - s[i-1]."""
        return float(self.deriv[i - 1])


def slope_trace(signal: Signal, c_ampl: float, step_ms: float = 4.0) -> SlopeTrace:
    x = signal.samples
    scale = c_ampl
    if scale <= 0:
        scale = float(np.max(np.abs(x))) or 1.0
    steps_per_sample = signal.fs * step_ms / 1000.0
    return SlopeTrace(deriv=np.diff(x / scale) * steps_per_sample)


def b_search_limits(signal: Signal, c_pos: int, c_ampl: float, params: DelineationParams) -> Tuple[int, int]:
    """(B_limL, B_limR) for the beat at c_pos."""

    x = signal.samples
    lim_left = c_pos - ms_to_samples(params.b_window_ms, signal.fs)
    if lim_left < 0 or c_pos >= x.size:
        raise WindowOutOfRangeError(
            f"B search window [{lim_left}, {c_pos}) falls outside the {x.size}-sample signal"
        )

    threshold = params.a_frac * c_ampl
    lim_right = lim_left
    for i in range(c_pos - 1, lim_left - 1, -1):
        if x[i] <= threshold:
            lim_right = i
            break
    return lim_left, lim_right


def detect_b(signal: Signal, c_pos: int, c_ampl: float, params: DelineationParams) -> int:
    """
    B point of the beat whose C peak sits at c_pos.

    Scans from B_limR down towards B_limL for the first local minimum or a slope
    magnitude above b_slope1, then for a slope above b_slope2, and finally falls
    back to the lowest sample in [B_limL, B_limR].

    Raises:
        WindowOutOfRangeError: the b_window_ms search window precedes the signal start
    """
    x = signal.samples
    lim_left, lim_right = b_search_limits(signal, c_pos, c_ampl, params)
    slopes = slope_trace(signal, c_ampl, params.slope_step_ms)

    for i in range(lim_right, lim_left, -1):
        if is_local_min(x, i) or abs(slopes.at(i)) > params.b_slope1:
            return i

    for i in range(lim_right, lim_left, -1):
        if slopes.at(i) > params.b_slope2:
            return i

    logger.debug(f"B for C={c_pos}: no minimum or slope break, using window argmin")
    return lim_left + int(np.argmin(x[lim_left:lim_right + 1]))


def _search_range(c_pos: int, lo_ms: float, hi_ms: float, fs: float, n: int) -> range:
    lo = max(c_pos + ms_to_samples(lo_ms, fs), 1)
    hi = min(c_pos + ms_to_samples(hi_ms, fs), n - 2)
    return range(lo, hi + 1)


def detect_xo(
    signal: Signal,
    c_pos: int,
    params: DelineationParams,
    next_c: Optional[int] = None,
    mean_cc_s: Optional[float] = None,
) -> Optional[Tuple[int, int]]:
    """
    (x, o) pair after the C peak at c_pos, or None when no pair is feasible.

    A pair is feasible when O is higher than X, the X-O gap lies in
    [xo_min_ms, xo_max_ms], fewer than xo_max_minima local minima sit strictly
    between them and O lies in the first half of the C-C interval (taken from
    next_c, else from mean_cc_s).
    """
    x = signal.samples
    fs = signal.fs
    n = x.size
    minima = local_minima_mask(x)
    maxima = local_maxima_mask(x)

    x_candidates = [i for i in _search_range(c_pos, params.cx_min_ms, params.cx_max_ms, fs, n) if minima[i]]
    o_candidates = [j for j in _search_range(c_pos, params.co_min_ms, params.co_max_ms, fs, n) if maxima[j]]
    if not x_candidates or not o_candidates:
        return None

    o_limit: Optional[float] = None
    if next_c is not None:
        o_limit = c_pos + (next_c - c_pos) / 2.0
    elif mean_cc_s:
        o_limit = c_pos + 0.5 * mean_cc_s * fs

    minima_before = np.concatenate(([0], np.cumsum(minima)))

    best: Optional[Tuple[int, int]] = None
    best_diff = -np.inf
    for xi in x_candidates:
        for oj in o_candidates:
            if o_limit is not None and oj > o_limit:
                continue
            diff = x[oj] - x[xi]
            if diff <= 0:
                continue
            gap_ms = (oj - xi) * 1000.0 / fs
            if gap_ms < params.xo_min_ms or gap_ms > params.xo_max_ms:
                continue
            between = minima_before[oj] - minima_before[xi + 1]
            if between >= params.xo_max_minima:
                continue
            if diff > best_diff:
                best, best_diff = (xi, oj), diff

    if best is None:
        logger.debug(f"no feasible X/O pair after C={c_pos}")
    return best

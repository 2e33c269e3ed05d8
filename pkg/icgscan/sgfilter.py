"""
Savitzky-Golay filter module
~~~~~~~~~~~~~~~~~~~~~~~~~~~~

Smoothing kernels with offline-computable coefficients, a band-split SNR estimate
and the adaptive filter-length loop run on every delineation window.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Tuple

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.fft import irfft, rfft, rfftfreq
from scipy.signal import savgol_coeffs

from .core import (
    CutoffAboveNyquistError,
    DelineationParams,
    InvalidGeometryError,
    Signal,
    SignalTooShortError,
)

logger = logging.getLogger(__name__)

STOP_SNR_THRESHOLD = "snr-threshold"
STOP_SNR_PLATEAU = "snr-plateau"
STOP_MAX_LENGTH = "max-length"

# high band counts as empty below this fraction of the total norm
_ZERO_BAND_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class SgKernel:
    """Least-squares smoothing weights for a centered window."""

    length: int
    order: int
    coeffs: np.ndarray

    @property
    def half(self) -> int:
        return self.length // 2


@lru_cache(maxsize=None)
def sg_coefficients(length: int, order: int) -> SgKernel:
    """
    Smoothing weights of a degree-`order` least-squares fit over `length` points.

    Kernels are cached and their weights are read-only, so one instance is shared
    by every window that asks for the same geometry.

    Raises:
        InvalidGeometryError: length even, or length <= order
    """
    if order < 0 or length <= 0 or length % 2 == 0 or length <= order:
        raise InvalidGeometryError(
            f"cannot build a Savitzky-Golay kernel with length={length}, order={order}"
        )
    coeffs = np.asarray(savgol_coeffs(length, order), dtype=float)
    coeffs.setflags(write=False)
    return SgKernel(length=length, order=order, coeffs=coeffs)


def kernel_for_length(length: int, order: int) -> SgKernel:
    """Kernel for `length`, clamping the fit order to length-1 so short windows stay valid."""

    return sg_coefficients(length, min(order, length - 1))


def sg_apply(signal: Signal, kernel: SgKernel) -> Signal:
    """
    Convolve the kernel over the interior; edge samples take the value of the
    polynomial fitted to the first (last) `length` samples.

    Raises:
        SignalTooShortError: signal shorter than the kernel
    """
    x = signal.samples
    n = x.size
    length = kernel.length
    if n < length:
        raise SignalTooShortError(f"signal of {n} samples is shorter than kernel length {length}")

    half = kernel.half
    out = np.empty(n, dtype=float)
    out[half:n - half] = np.correlate(x, kernel.coeffs, mode="valid")

    if half:
        positions = np.arange(length, dtype=float)
        head = P.polyfit(positions, x[:length], kernel.order)
        out[:half] = P.polyval(positions[:half], head)
        tail = P.polyfit(positions, x[-length:], kernel.order)
        out[n - half:] = P.polyval(positions[length - half:], tail)

    return signal.with_samples(out)


def estimate_snr(signal: Signal, cutoff_hz: float) -> float:
    """
    Ratio of the 2-norms of the band below and the band at/above `cutoff_hz`.

    The DC bin belongs to neither band. Returns math.inf when the high band is empty.
    """
    x = signal.samples
    n = x.size
    if n < 8:
        raise SignalTooShortError(f"SNR estimate needs at least 8 samples, got {n}")
    if cutoff_hz <= 0 or cutoff_hz >= signal.fs / 2:
        raise CutoffAboveNyquistError(
            f"cutoff {cutoff_hz} Hz must lie in (0, {signal.fs / 2}) Hz for fs={signal.fs}"
        )

    spectrum = rfft(x)
    freqs = rfftfreq(n, d=1.0 / signal.fs)
    low_band = np.where((freqs > 0) & (freqs < cutoff_hz), spectrum, 0)
    high_band = np.where(freqs >= cutoff_hz, spectrum, 0)
    low_norm = float(np.linalg.norm(irfft(low_band, n=n)))
    high_norm = float(np.linalg.norm(irfft(high_band, n=n)))

    if high_norm <= _ZERO_BAND_RTOL * max(low_norm + high_norm, np.finfo(float).tiny):
        return math.inf
    return low_norm / high_norm


def fixed_filter(signal: Signal, length: int, order: int) -> Signal:
    return sg_apply(signal, kernel_for_length(length, order))


@dataclass
class AdaptiveFilterOutcome:
    """Filtered window plus the record of how its length was chosen."""

    signal: Signal
    length: int
    stop_reason: str
    snr_trace: List[Tuple[int, float]] = field(default_factory=list)


def _relative_gain(previous: float, current: float) -> float:
    if previous <= 0:
        return math.inf
    return (current - previous) / previous


def run_adaptive_filter(signal: Signal, params: DelineationParams) -> AdaptiveFilterOutcome:
    """Grow the SG length from sg_len_start until one of the stop conditions fires."""

    n = len(signal)
    max_length = min(params.sg_len_max, n if n % 2 else n - 1)
    length = params.sg_len_start
    previous_snr = None
    trace: List[Tuple[int, float]] = []

    while True:
        filtered = fixed_filter(signal, length, params.sg_order)
        snr = estimate_snr(filtered, params.snr_cutoff_hz)
        trace.append((length, snr))

        if snr >= params.snr_thr:
            reason = STOP_SNR_THRESHOLD
            break
        if previous_snr is not None and _relative_gain(previous_snr, snr) < params.snr_impr_thr:
            reason = STOP_SNR_PLATEAU
            break
        if length + params.sg_len_step > max_length:
            reason = STOP_MAX_LENGTH
            break

        previous_snr = snr
        length += params.sg_len_step

    logger.debug(
        f"adaptive filter stopped at L={length} ({reason}); "
        f"trace={[(lngth, round(value, 3)) for lngth, value in trace]}"
    )
    return AdaptiveFilterOutcome(signal=filtered, length=length, stop_reason=reason, snr_trace=trace)


def adaptive_filter(signal: Signal, params: DelineationParams) -> Tuple[Signal, int]:
    """Filtered window and the chosen SG length."""

    outcome = run_adaptive_filter(signal, params)
    return outcome.signal, outcome.length

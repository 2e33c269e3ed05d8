"""
Utility module
~~~~~~~~~~~~~~

Local-extremum helpers shared by the detectors and the synthetic self-check.
"""

from typing import Sequence

import numpy as np


def is_local_min(samples: Sequence[float], i: int) -> bool:
    """
    Strict local minimum test; on a plateau only the leftmost sample qualifies.

    Args:
        samples: signal values
        i: index to test

    Returns:
        True when samples[i] is below its left neighbour and the next different
        value to its right is higher
    """
    n = len(samples)
    if i <= 0 or i >= n - 1:
        return False
    if not samples[i] < samples[i - 1]:
        return False
    j = i + 1
    while j < n and samples[j] == samples[i]:
        j += 1
    return j < n and samples[j] > samples[i]


def is_local_max(samples: Sequence[float], i: int) -> bool:
    """Mirror of is_local_min."""
    n = len(samples)
    if i <= 0 or i >= n - 1:
        return False
    if not samples[i] > samples[i - 1]:
        return False
    j = i + 1
    while j < n and samples[j] == samples[i]:
        j += 1
    return j < n and samples[j] < samples[i]


def _extremum_mask(samples: Sequence[float], direction: int) -> np.ndarray:
    x = np.asarray(samples, dtype=float)
    n = x.size
    mask = np.zeros(n, dtype=bool)
    if n < 3:
        return mask

    step = np.sign(np.diff(x)) * direction
    # index of the first non-flat step at or after each position
    flat_to_end = np.where(step != 0, np.arange(n - 1), n - 1)
    next_change = np.minimum.accumulate(flat_to_end[::-1])[::-1]
    leaving = np.where(next_change < n - 1, step[np.minimum(next_change, n - 2)], 0)

    entering = step[:-1]
    mask[1:-1] = (entering < 0) & (leaving[1:] > 0)
    return mask


def local_minima_mask(samples: Sequence[float]) -> np.ndarray:
    """Vectorised is_local_min over the whole array."""
    return _extremum_mask(samples, 1)


def local_maxima_mask(samples: Sequence[float]) -> np.ndarray:
    """Vectorised is_local_max over the whole array."""
    return _extremum_mask(samples, -1)


def is_local_peak(samples: Sequence[float], i: int, radius: int) -> bool:
    """True when samples[i] is the largest value within +-radius and not on the array edge."""
    n = len(samples)
    if i <= 0 or i >= n - 1:
        return False
    lo = max(0, i - radius)
    hi = min(n, i + radius + 1)
    return bool(samples[i] >= np.max(samples[lo:hi]))

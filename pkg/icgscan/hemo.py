"""Beat-to-beat hemodynamic parameters derived from B/C/X/O annotations."""

from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Sequence

from .core import BeatAnnotation, samples_to_ms

HEMO_FIELDS = ("cc_time", "hr", "lvet", "ivrt", "bc_ampl")


@dataclass(frozen=True)
class HemoParams:
    """Times in ms, heart rate in beats/min, bc_ampl in signal units."""

    cc_time: Optional[float] = None
    hr: Optional[float] = None
    lvet: Optional[float] = None
    ivrt: Optional[float] = None
    bc_ampl: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _interval_ms(start: Optional[int], stop: Optional[int], fs: float) -> Optional[float]:
    if start is None or stop is None:
        return None
    return samples_to_ms(stop - start, fs)


def compute_hemo(beats: Sequence[BeatAnnotation], fs: float) -> List[HemoParams]:
    """
    Per-beat parameters. cc_time and hr use the next beat's C and are absent for
    the last beat; every field is absent when a point it needs is absent.
    """
    results: List[HemoParams] = []
    for k, beat in enumerate(beats):
        next_c = beats[k + 1].c if k + 1 < len(beats) else None
        cc_time = _interval_ms(beat.c, next_c, fs)
        hr = 60000.0 / cc_time if cc_time else None

        bc_ampl = None
        if beat.amp_c is not None and beat.amp_b is not None:
            bc_ampl = beat.amp_c - beat.amp_b

        results.append(
            HemoParams(
                cc_time=cc_time,
                hr=hr,
                lvet=_interval_ms(beat.b, beat.x, fs),
                ivrt=_interval_ms(beat.x, beat.o, fs),
                bc_ampl=bc_ampl,
            )
        )
    return results

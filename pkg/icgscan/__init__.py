"""
icgscan
~~~~~~~

Beat-to-beat B/C/X/O delineation of impedance cardiograms from the ICG signal alone,
hemodynamic parameters and detection-quality evaluation.
"""

__version__ = '0.1.0'

from .core import BeatAnnotation, DelineationError, DelineationParams, Signal  # noqa: E402
from .pipeline import DelineationResult, IcgDelineator, run_pipeline  # noqa: E402

__all__ = [
    "BeatAnnotation",
    "DelineationError",
    "DelineationParams",
    "DelineationResult",
    "IcgDelineator",
    "Signal",
    "run_pipeline",
    "__version__",
]

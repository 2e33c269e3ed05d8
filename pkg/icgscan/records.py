"""
Record file formats
~~~~~~~~~~~~~~~~~~~

Delimited-text signals (`time_s,value` or a single `value` column), beat annotation
tables (`b,c,x,o` sample indices with optional amplitudes), result tables, plot data
and corpus directories of `<name>.csv` + `<name>_truth.csv` pairs.
"""

import csv
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import (
    POINT_TYPES,
    AnnotationFormatError,
    BeatAnnotation,
    SamplingRateRequiredError,
    Signal,
)
from .synth import GroundTruthRecord

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

AMPLITUDE_COLUMNS = tuple(f"amp_{name}" for name in POINT_TYPES)
ANNOTATION_COLUMNS = POINT_TYPES + AMPLITUDE_COLUMNS
TRUTH_SUFFIX = "_truth"


def _read_rows(path: Path) -> List[Tuple[int, List[str]]]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            return [(number, row) for number, row in enumerate(csv.reader(f), start=1) if any(cell.strip() for cell in row)]
    except OSError as e:
        raise AnnotationFormatError(f"cannot read {path}: {e.strerror}") from e


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_signal(path: PathLike, fs: Optional[float] = None) -> Signal:
    """
    Load a signal file.

    Two columns are `time_s,value`; fs is taken from the time column unless given.
    A single `value` column needs fs. A non-numeric first row is treated as a header.

    Raises:
        AnnotationFormatError: unreadable or malformed file
        SamplingRateRequiredError: single-column file and no fs
    """
    path = Path(path)
    rows = _read_rows(path)
    if rows and not all(_is_number(cell) for cell in rows[0][1]):
        rows = rows[1:]
    if not rows:
        raise AnnotationFormatError(f"{path}: no samples")

    width = len(rows[0][1])
    if width not in (1, 2):
        raise AnnotationFormatError(f"{path}: expected 1 or 2 columns, found {width}")
    try:
        table = np.array([[float(cell) for cell in row] for _, row in rows], dtype=float)
    except ValueError as e:
        bad = next(number for number, row in rows if len(row) != width or not all(_is_number(c) for c in row))
        raise AnnotationFormatError(f"{path}:{bad}: non-numeric or ragged row") from e

    if width == 1:
        if fs is None:
            raise SamplingRateRequiredError(f"{path}: single-column signal needs a sampling rate (--fs)")
        return Signal(table[:, 0], fs)

    times = table[:, 0]
    steps = np.diff(times)
    if steps.size and np.any(steps <= 0):
        raise AnnotationFormatError(f"{path}: time column is not strictly increasing")
    if fs is None:
        if not steps.size:
            raise SamplingRateRequiredError(f"{path}: one sample is not enough to infer the sampling rate")
        fs = float(round(1.0 / float(np.median(steps)), 6))
    return Signal(table[:, 1], fs)


def write_signal(path: PathLike, signal: Signal, with_time: bool = True) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        if with_time:
            writer.writerow(("time_s", "value"))
            for t, value in zip(signal.times(), signal.samples):
                writer.writerow((f"{t:.9g}", repr(float(value))))
        else:
            writer.writerow(("value",))
            for value in signal.samples:
                writer.writerow((repr(float(value)),))
    return path


def _parse_cell(cell: Optional[str], integer: bool) -> Optional[Union[int, float]]:
    if cell is None or not cell.strip():
        return None
    value = float(cell)
    if integer:
        if not value.is_integer():
            raise ValueError(f"sample index {cell!r} is not an integer")
        return int(value)
    return value


def read_annotations(path: PathLike) -> List[BeatAnnotation]:
    """
    Load a beat table; rows come back sorted by C.

    Raises:
        AnnotationFormatError: unreadable file, missing point columns or a bad row
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            reader = csv.DictReader(f)
            header = [name.strip() for name in (reader.fieldnames or [])]
            missing = [name for name in POINT_TYPES if name not in header]
            if missing:
                raise AnnotationFormatError(f"{path}: missing columns {', '.join(missing)}")
            reader.fieldnames = header
            beats = []
            for number, row in enumerate(reader, start=2):
                try:
                    values: Dict[str, Any] = {name: _parse_cell(row.get(name), True) for name in POINT_TYPES}
                    values.update({name: _parse_cell(row.get(name), False) for name in AMPLITUDE_COLUMNS if name in header})
                    beats.append(BeatAnnotation(**values))
                except ValueError as e:
                    raise AnnotationFormatError(f"{path}:{number}: {e}") from e
    except OSError as e:
        raise AnnotationFormatError(f"cannot read {path}: {e.strerror}") from e

    return sorted(beats, key=lambda beat: (beat.c is None, beat.c if beat.c is not None else 0))


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_annotations(path: PathLike, beats: Sequence[BeatAnnotation], amplitudes: bool = True) -> Path:
    path = Path(path)
    columns = ANNOTATION_COLUMNS if amplitudes else POINT_TYPES
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for beat in beats:
            data = beat.to_dict()
            writer.writerow([_cell(data[name]) for name in columns])
    return path


def attach_amplitudes(beats: Iterable[BeatAnnotation], signal: Signal) -> List[BeatAnnotation]:
    """Fill amplitudes from `signal`; indices outside it are an error."""

    n = len(signal)
    attached = []
    for beat in beats:
        outside = [index for index in beat.indices() if index is not None and not 0 <= index < n]
        if outside:
            raise AnnotationFormatError(f"beat indices {outside} fall outside the {n}-sample signal")
        attached.append(beat.with_amplitudes(signal.samples))
    return attached


def write_table(path: PathLike, rows: Sequence[Dict[str, Any]]) -> Path:
    """CSV with the union of row keys as header, in first-seen order."""

    path = Path(path)
    columns: List[str] = []
    for row in rows:
        columns.extend(key for key in row if key not in columns)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(column)) for column in columns])
    return path


def write_plot_data(path: PathLike, signal: Signal, beats: Sequence[BeatAnnotation]) -> Path:
    """`time_s,value,b,c,x,o`; marker columns hold the signal value at annotated samples."""

    markers: Dict[str, Dict[int, float]] = {name: {} for name in POINT_TYPES}
    for beat in beats:
        for name, index in beat.points().items():
            if index is not None and 0 <= index < len(signal):
                markers[name][index] = float(signal.samples[index])

    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(("time_s", "value") + POINT_TYPES)
        for i, (t, value) in enumerate(zip(signal.times(), signal.samples)):
            row = [f"{t:.9g}", repr(float(value))]
            row.extend(_cell(markers[name].get(i)) for name in POINT_TYPES)
            writer.writerow(row)
    return path


def truth_path_for(signal_path: PathLike) -> Path:
    signal_path = Path(signal_path)
    return signal_path.with_name(f"{signal_path.stem}{TRUTH_SUFFIX}.csv")


def save_record(record: GroundTruthRecord, signal_path: PathLike) -> Tuple[Path, Path]:
    """Write the signal and its `<stem>_truth.csv` annotations side by side."""

    signal_path = write_signal(signal_path, record.signal)
    truth_path = write_annotations(truth_path_for(signal_path), record.beats)
    return signal_path, truth_path


def load_corpus(directory: PathLike, fs: Optional[float] = None) -> List[GroundTruthRecord]:
    """
    Every `<name>.csv` with a matching `<name>_truth.csv` in `directory`, sorted by name.

    Raises:
        AnnotationFormatError: not a directory, or no record pairs inside
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise AnnotationFormatError(f"corpus directory {directory} does not exist")

    records = []
    for signal_path in sorted(directory.glob("*.csv")):
        if signal_path.stem.endswith(TRUTH_SUFFIX):
            continue
        truth_path = truth_path_for(signal_path)
        if not truth_path.exists():
            logger.warning(f"{signal_path} has no {truth_path.name}, skipped")
            continue
        signal = read_signal(signal_path, fs)
        beats = attach_amplitudes(read_annotations(truth_path), signal)
        records.append(GroundTruthRecord(signal=signal, beats=beats, name=signal_path.stem))

    if not records:
        raise AnnotationFormatError(f"{directory}: no <name>.csv / <name>{TRUTH_SUFFIX}.csv pairs found")
    logger.info(f"loaded {len(records)} records from {directory}")
    return records

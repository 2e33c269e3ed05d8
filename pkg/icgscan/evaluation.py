"""
Evaluation module
~~~~~~~~~~~~~~~~~

Tolerance-windowed matching of detected against reference points, detection metrics,
hemodynamic error statistics, parameter grid search and the fixed-versus-adaptive
filter length sweep.
"""

import itertools
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, TypeVar

import numpy as np
from pydantic import ValidationError
from tqdm import tqdm

from .core import (
    POINT_TYPES,
    BeatAnnotation,
    DelineationError,
    DelineationParams,
    EmptyGridError,
    InvalidGeometryError,
    point_series,
)
from .hemo import HEMO_FIELDS, compute_hemo
from .pipeline import DelineationResult, IcgDelineator
from .synth import GroundTruthRecord

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE_MS = 30.0
# points the calibration objective averages over; C does not depend on the B/X/O parameters
OBJECTIVE_POINTS = ("b", "x", "o")

T = TypeVar("T")
R = TypeVar("R")


@dataclass
class MatchResult:
    """Outcome of matching one point type; pairs hold (reference position, detected position) in the input lists."""

    tp: int = 0
    fp: int = 0
    fn: int = 0
    matched_offsets: List[float] = field(default_factory=list)
    pairs: List[Tuple[int, int]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "matched_offsets": list(self.matched_offsets)}


def match_points(
    detected: Sequence[int], reference: Sequence[int], tolerance_ms: float = DEFAULT_TOLERANCE_MS, fs: float = 250.0
) -> MatchResult:
    """
    Greedy one-to-one matching.

    Each reference point, in order, takes the closest detected point not yet consumed
    whose offset lies within [-tolerance_ms, +tolerance_ms]. Offsets are detected
    minus reference, in ms.
    """
    if fs <= 0:
        raise ValueError(f"sampling rate must be positive, got {fs} Hz")
    detected_arr = np.asarray(detected, dtype=float)
    consumed = np.zeros(detected_arr.size, dtype=bool)
    result = MatchResult()

    for r_pos, ref in enumerate(reference):
        if detected_arr.size == 0:
            result.fn += 1
            continue
        offsets = (detected_arr - ref) * 1000.0 / fs
        distance = np.where(consumed, np.inf, np.abs(offsets))
        best = int(np.argmin(distance))
        if distance[best] <= tolerance_ms + 1e-9:
            consumed[best] = True
            result.tp += 1
            result.matched_offsets.append(float(offsets[best]))
            result.pairs.append((r_pos, best))
        else:
            result.fn += 1

    result.fp = int(detected_arr.size - np.count_nonzero(consumed))
    return result


def geometric_mean(se: Optional[float], ppv: Optional[float]) -> Optional[float]:
    if se is None or ppv is None:
        return None
    return math.sqrt(se * ppv)


def _percent(numerator: float, denominator: float) -> Optional[float]:
    if denominator == 0:
        return None
    return 100.0 * numerator / denominator


def _mean_std(values: Sequence[Optional[float]]) -> Tuple[Optional[float], Optional[float]]:
    present = [v for v in values if v is not None]
    if not present:
        return None, None
    return float(np.mean(present)), float(np.std(present))


@dataclass
class PointScore:
    """Detection metrics for one point type (percentages, ms); *_std fields are set on aggregated reports."""

    tp: int = 0
    fp: int = 0
    fn: int = 0
    se: Optional[float] = None
    ppv: Optional[float] = None
    der: Optional[float] = None
    gmean: Optional[float] = None
    me: Optional[float] = None
    sigma: Optional[float] = None
    se_std: Optional[float] = None
    ppv_std: Optional[float] = None
    der_std: Optional[float] = None
    gmean_std: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def score(matches: MatchResult) -> PointScore:
    """SE, PPV, DER, Gmean and me/sigma of |offset|; metrics with a zero denominator stay None."""

    tp, fp, fn = matches.tp, matches.fp, matches.fn
    se = _percent(tp, tp + fn)
    ppv = _percent(tp, tp + fp)
    me, sigma = _mean_std([abs(offset) for offset in matches.matched_offsets])
    return PointScore(
        tp=tp,
        fp=fp,
        fn=fn,
        se=se,
        ppv=ppv,
        der=_percent(fp + fn, tp + fn),
        gmean=geometric_mean(se, ppv),
        me=me,
        sigma=sigma,
    )


@dataclass
class HemoErrorStat:
    """Absolute and relative (% of reference) error of one hemodynamic parameter."""

    n: int = 0
    abs_mean: Optional[float] = None
    abs_std: Optional[float] = None
    rel_mean: Optional[float] = None
    rel_std: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _with_c(beats: Sequence[BeatAnnotation]) -> List[BeatAnnotation]:
    return sorted((beat for beat in beats if beat.c is not None), key=lambda beat: beat.c)


def hemo_error(
    detected_beats: Sequence[BeatAnnotation],
    reference_beats: Sequence[BeatAnnotation],
    fs: float,
    tolerance_ms: float = DEFAULT_TOLERANCE_MS,
) -> Dict[str, HemoErrorStat]:
    """
    Errors of each hemodynamic parameter over C-matched beat pairs.

    Pairs where either side lacks a parameter are left out of that parameter's
    statistics; relative errors also skip pairs whose reference value is 0.
    """
    detected = _with_c(detected_beats)
    reference = _with_c(reference_beats)
    c_match = match_points(point_series(detected, "c"), point_series(reference, "c"), tolerance_ms, fs)

    detected_hemo = compute_hemo(detected, fs)
    reference_hemo = compute_hemo(reference, fs)

    stats: Dict[str, HemoErrorStat] = {}
    for name in HEMO_FIELDS:
        absolute: List[float] = []
        relative: List[float] = []
        for r_pos, d_pos in c_match.pairs:
            ref_value = getattr(reference_hemo[r_pos], name)
            det_value = getattr(detected_hemo[d_pos], name)
            if ref_value is None or det_value is None:
                continue
            error = abs(ref_value - det_value)
            absolute.append(error)
            if ref_value != 0:
                relative.append(100.0 * error / abs(ref_value))
        abs_mean, abs_std = _mean_std(absolute)
        rel_mean, rel_std = _mean_std(relative)
        stats[name] = HemoErrorStat(n=len(absolute), abs_mean=abs_mean, abs_std=abs_std, rel_mean=rel_mean, rel_std=rel_std)
    return stats


@dataclass
class EvalReport:
    """Detection metrics per point type and hemodynamic errors, for one record or aggregated over many."""

    tolerance_ms: float = DEFAULT_TOLERANCE_MS
    points: Dict[str, PointScore] = field(default_factory=dict)
    hemo: Dict[str, HemoErrorStat] = field(default_factory=dict)
    records: int = 1
    filter_length_mean: Optional[float] = None
    filter_length_std: Optional[float] = None

    def gmean(self, point: str) -> Optional[float]:
        point_score = self.points.get(point)
        return point_score.gmean if point_score else None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tolerance_ms": self.tolerance_ms,
            "records": self.records,
            "points": {name: point_score.to_dict() for name, point_score in self.points.items()},
            "hemo": {name: stat.to_dict() for name, stat in self.hemo.items()},
            "filter_length_mean": self.filter_length_mean,
            "filter_length_std": self.filter_length_std,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EvalReport":
        return cls(
            tolerance_ms=data.get("tolerance_ms", DEFAULT_TOLERANCE_MS),
            points={name: PointScore(**values) for name, values in data.get("points", {}).items()},
            hemo={name: HemoErrorStat(**values) for name, values in data.get("hemo", {}).items()},
            records=data.get("records", 1),
            filter_length_mean=data.get("filter_length_mean"),
            filter_length_std=data.get("filter_length_std"),
        )


def evaluate_record(
    detected: Sequence[BeatAnnotation],
    reference: Sequence[BeatAnnotation],
    fs: float,
    tolerance_ms: float = DEFAULT_TOLERANCE_MS,
) -> EvalReport:
    """Match and score every point type of one record, plus the hemodynamic errors."""

    points = {
        name: score(match_points(point_series(detected, name), point_series(reference, name), tolerance_ms, fs))
        for name in POINT_TYPES
    }
    return EvalReport(
        tolerance_ms=tolerance_ms,
        points=points,
        hemo=hemo_error(detected, reference, fs, tolerance_ms),
        records=1,
    )


def _aggregate_points(scores: Sequence[PointScore]) -> PointScore:
    aggregated = PointScore(
        tp=sum(s.tp for s in scores),
        fp=sum(s.fp for s in scores),
        fn=sum(s.fn for s in scores),
    )
    for metric in ("se", "ppv", "der", "gmean"):
        mean, std = _mean_std([getattr(s, metric) for s in scores])
        setattr(aggregated, metric, mean)
        setattr(aggregated, f"{metric}_std", std)
    aggregated.me, aggregated.sigma = _mean_std([s.me for s in scores])
    return aggregated


def _aggregate_hemo(stats: Sequence[HemoErrorStat]) -> HemoErrorStat:
    abs_mean, abs_std = _mean_std([s.abs_mean for s in stats])
    rel_mean, rel_std = _mean_std([s.rel_mean for s in stats])
    return HemoErrorStat(n=sum(s.n for s in stats), abs_mean=abs_mean, abs_std=abs_std, rel_mean=rel_mean, rel_std=rel_std)


def aggregate_reports(reports: Sequence[EvalReport]) -> EvalReport:
    """
    Unweighted mean and standard deviation of per-record values.

    A single record is returned as is, so its beat-level sigma survives.
    """
    if not reports:
        raise ValueError("no reports to aggregate")
    if len(reports) == 1:
        return reports[0]

    first = reports[0]
    return EvalReport(
        tolerance_ms=first.tolerance_ms,
        points={name: _aggregate_points([r.points[name] for r in reports]) for name in first.points},
        hemo={name: _aggregate_hemo([r.hemo[name] for r in reports]) for name in first.hemo},
        records=sum(r.records for r in reports),
        filter_length_mean=first.filter_length_mean,
        filter_length_std=first.filter_length_std,
    )


def evaluate_records(
    pairs: Sequence[Tuple[Sequence[BeatAnnotation], Sequence[BeatAnnotation], float]],
    tolerance_ms: float = DEFAULT_TOLERANCE_MS,
) -> EvalReport:
    """Aggregate report over (detected, reference, fs) triples."""

    return aggregate_reports(
        [evaluate_record(detected, reference, fs, tolerance_ms) for detected, reference, fs in pairs]
    )


def filter_length_summary(results: Sequence[DelineationResult]) -> Tuple[Optional[float], Optional[float]]:
    """Mean and standard deviation of the per-window filter lengths over all results."""

    lengths = [length for result in results for length in result.filter_lengths]
    if not lengths:
        return None, None
    return float(np.mean(lengths)), float(np.std(lengths))


def _map_ordered(
    func: Callable[[T], R], items: Sequence[T], max_workers: int = 1, progress: bool = False, desc: str = ""
) -> List[R]:
    """Apply func to every item, in a thread pool when max_workers > 1; results keep input order."""

    results: List[Optional[R]] = [None] * len(items)
    if max_workers <= 1:
        for index, item in enumerate(tqdm(items, desc=desc, disable=not progress)):
            results[index] = func(item)
        return results  # type: ignore[return-value]

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = {executor.submit(func, item): index for index, item in enumerate(items)}
        for future in tqdm(as_completed(futures), total=len(futures), desc=desc, disable=not progress):
            results[futures[future]] = future.result()
    return results  # type: ignore[return-value]


def evaluate_corpus(
    corpus: Sequence[GroundTruthRecord],
    params: Optional[DelineationParams] = None,
    filter_length: Optional[int] = None,
    tolerance_ms: float = DEFAULT_TOLERANCE_MS,
    max_workers: int = 1,
    progress: bool = False,
) -> EvalReport:
    """Run the pipeline over every record and aggregate the per-record reports."""

    if not corpus:
        raise DelineationError("corpus is empty")
    delineator = IcgDelineator(params, filter_length)

    records = list(corpus)
    results = _map_ordered(lambda record: delineator.run(record.signal), records, max_workers, progress, desc="records")
    report = evaluate_records(
        [(result.beats, record.beats, record.signal.fs) for result, record in zip(results, records)],
        tolerance_ms,
    )
    report.filter_length_mean, report.filter_length_std = filter_length_summary(results)
    return report


def calibration_objective(report: EvalReport) -> float:
    """Mean Gmean over B, X and O; an undefined Gmean counts as 0."""

    return float(np.mean([report.gmean(point) or 0.0 for point in OBJECTIVE_POINTS]))


@dataclass
class CalibrationRow:
    index: int
    overrides: Dict[str, Any]
    gmeans: Dict[str, Optional[float]] = field(default_factory=dict)
    objective: Optional[float] = None
    selected: bool = False

    def to_dict(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {"index": self.index}
        row.update(self.overrides)
        for point in POINT_TYPES:
            row[f"gmean_{point}"] = self.gmeans.get(point)
        row["objective"] = self.objective
        row["selected"] = self.selected
        return row


@dataclass
class CalibrationResult:
    rows: List[CalibrationRow]
    best_index: int
    best_params: DelineationParams

    @property
    def best_row(self) -> CalibrationRow:
        return self.rows[self.best_index]

    def table_rows(self) -> List[Dict[str, Any]]:
        return [row.to_dict() for row in self.rows]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "best_index": self.best_index,
            "best_params": self.best_params.model_dump(),
            "rows": self.table_rows(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)


def expand_grid(grid: Mapping[str, Sequence[Any]]) -> List[Dict[str, Any]]:
    """Cartesian product of the grid, the last key varying fastest."""

    if not grid or any(len(values) == 0 for values in grid.values()):
        raise EmptyGridError("calibration grid has no points")
    unknown = [name for name in grid if name not in DelineationParams.model_fields]
    if unknown:
        raise DelineationError(f"unknown parameters in grid: {', '.join(sorted(unknown))}")
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[key] for key in keys))]


def calibrate(
    corpus: Sequence[GroundTruthRecord],
    grid: Mapping[str, Sequence[Any]],
    base_params: Optional[DelineationParams] = None,
    tolerance_ms: float = DEFAULT_TOLERANCE_MS,
    max_workers: int = 1,
    progress: bool = False,
    filter_length: Optional[int] = None,
) -> CalibrationResult:
    """
    Exhaustive grid search.

    Every grid point is evaluated on the whole corpus; the best mean B/X/O Gmean wins
    and ties keep the earliest grid point. Grid points that do not form valid
    parameters are listed with no objective.

    Raises:
        EmptyGridError: the grid is empty or none of its points is valid
    """
    if not corpus:
        raise DelineationError("calibration corpus is empty")
    base_params = base_params or DelineationParams()
    points = expand_grid(grid)

    def run_point(indexed: Tuple[int, Dict[str, Any]]) -> CalibrationRow:
        index, overrides = indexed
        row = CalibrationRow(index=index, overrides=overrides)
        try:
            params = base_params.with_overrides(**overrides)
        except ValidationError as e:
            logger.warning(f"grid point {index} {overrides} skipped: {e.errors()[0]['msg']}")
            return row
        report = evaluate_corpus(corpus, params, filter_length, tolerance_ms)
        row.gmeans = {point: report.gmean(point) for point in POINT_TYPES}
        row.objective = calibration_objective(report)
        logger.debug(f"grid point {index} {overrides}: objective {row.objective:.3f}")
        return row

    rows = _map_ordered(run_point, list(enumerate(points)), max_workers, progress, desc="grid")

    best_index: Optional[int] = None
    for row in rows:
        if row.objective is None:
            continue
        if best_index is None or row.objective > rows[best_index].objective:
            best_index = row.index
    if best_index is None:
        raise EmptyGridError("no grid point forms valid delineation parameters")

    rows[best_index].selected = True
    best_params = base_params.with_overrides(**rows[best_index].overrides)
    logger.info(f"calibration picked grid point {best_index} of {len(rows)}: {rows[best_index].overrides}")
    return CalibrationResult(rows=rows, best_index=best_index, best_params=best_params)


ADAPTIVE_LABEL = "adaptive"


@dataclass
class SweepRow:
    label: str
    filter_length: Optional[int]
    report: EvalReport

    def to_dict(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {"config": self.label}
        for point in POINT_TYPES:
            row[f"gmean_{point}"] = self.report.gmean(point)
        row["mean_filter_length"] = self.report.filter_length_mean
        return row


@dataclass
class SweepResult:
    rows: List[SweepRow]

    def row(self, label: str) -> SweepRow:
        for row in self.rows:
            if row.label == label:
                return row
        raise KeyError(label)

    @property
    def adaptive(self) -> SweepRow:
        return self.row(ADAPTIVE_LABEL)

    def fixed(self, length: int) -> SweepRow:
        return self.row(str(length))

    def table_rows(self) -> List[Dict[str, Any]]:
        return [row.to_dict() for row in self.rows]

    def to_dict(self) -> Dict[str, Any]:
        return {"rows": self.table_rows()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)


def sweep_filter_lengths(
    corpus: Sequence[GroundTruthRecord],
    lengths: Sequence[int],
    params: Optional[DelineationParams] = None,
    tolerance_ms: float = DEFAULT_TOLERANCE_MS,
    max_workers: int = 1,
    progress: bool = False,
) -> SweepResult:
    """One evaluation per fixed SG length, plus one with the adaptive length."""

    bad = [length for length in lengths if length < 1 or length % 2 == 0]
    if bad:
        raise InvalidGeometryError(f"filter lengths must be positive odd integers, got {bad}")

    configs: List[Optional[int]] = [int(length) for length in lengths] + [None]

    def run_config(filter_length: Optional[int]) -> SweepRow:
        report = evaluate_corpus(corpus, params, filter_length, tolerance_ms)
        label = ADAPTIVE_LABEL if filter_length is None else str(filter_length)
        return SweepRow(label=label, filter_length=filter_length, report=report)

    return SweepResult(rows=_map_ordered(run_config, configs, max_workers, progress, desc="sweep"))

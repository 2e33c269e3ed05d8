"""Pure presentation helpers shared by the HTML report and the CLI summaries."""

from __future__ import annotations

from typing import List, Optional

from .core import POINT_TYPES
from .evaluation import CalibrationResult, EvalReport, SweepResult
from .hemo import HEMO_FIELDS
from .pipeline import DelineationResult

POINT_LABELS = {
    "b": "B",
    "c": "C",
    "x": "X",
    "o": "O",
}

HEMO_LABELS = {
    "cc_time": "C-C time (ms)",
    "hr": "HR (bpm)",
    "lvet": "LVET (ms)",
    "ivrt": "IVRT (ms)",
    "bc_ampl": "BC amplitude",
}


def point_label(point: str) -> str:
    return POINT_LABELS.get(point, point.upper())


def format_metric(value: Optional[float], spread: Optional[float] = None, digits: int = 2) -> str:
    """`value` or `value ± spread`; absent values render as a dash."""

    if value is None:
        return "-"
    if spread is None:
        return f"{value:.{digits}f}"
    return f"{value:.{digits}f} ± {spread:.{digits}f}"


def report_summary_markdown(report: EvalReport, title: str = "Delineation quality") -> str:
    lines: List[str] = [
        f"# {title}",
        "",
        f"- **Records**: {report.records}",
        f"- **Tolerance**: ±{report.tolerance_ms:g} ms",
    ]
    if report.filter_length_mean is not None:
        lines.append(f"- **Filter length**: {format_metric(report.filter_length_mean, report.filter_length_std, 1)}")

    lines += [
        "",
        "## Detection",
        "",
        "| Point | TP | FP | FN | SE (%) | PPV (%) | DER (%) | Gmean (%) | me ± σ (ms) |",
        "| --- | --- | --- | --- | --- | --- | --- | --- | --- |",
    ]
    for point in POINT_TYPES:
        s = report.points.get(point)
        if s is None:
            continue
        lines.append(
            f"| {point_label(point)} | {s.tp} | {s.fp} | {s.fn} | {format_metric(s.se, s.se_std)} "
            f"| {format_metric(s.ppv, s.ppv_std)} | {format_metric(s.der, s.der_std)} "
            f"| {format_metric(s.gmean, s.gmean_std)} | {format_metric(s.me, s.sigma)} |"
        )

    if report.hemo:
        lines += [
            "",
            "## Hemodynamic parameters",
            "",
            "| Parameter | Pairs | Absolute error | Relative error (%) |",
            "| --- | --- | --- | --- |",
        ]
        for name in HEMO_FIELDS:
            stat = report.hemo.get(name)
            if stat is None:
                continue
            lines.append(
                f"| {HEMO_LABELS[name]} | {stat.n} | {format_metric(stat.abs_mean, stat.abs_std)} "
                f"| {format_metric(stat.rel_mean, stat.rel_std)} |"
            )
    return "\n".join(lines) + "\n"


def sweep_summary_markdown(sweep: SweepResult) -> str:
    header = "| Filter length | " + " | ".join(f"Gmean {point_label(p)} (%)" for p in POINT_TYPES) + " | Mean length |"
    lines = [
        "# Filter length sweep",
        "",
        header,
        "| " + " | ".join(["---"] * (len(POINT_TYPES) + 2)) + " |",
    ]
    for row in sweep.rows:
        cells = [format_metric(row.report.gmean(p)) for p in POINT_TYPES]
        lines.append(f"| {row.label} | " + " | ".join(cells) + f" | {format_metric(row.report.filter_length_mean, digits=1)} |")
    return "\n".join(lines) + "\n"


def calibration_summary_markdown(result: CalibrationResult) -> str:
    best = result.best_row
    lines = [
        "# Calibration",
        "",
        f"- **Grid points**: {len(result.rows)}",
        f"- **Selected**: #{best.index} {best.overrides}",
        f"- **Objective (mean Gmean B/X/O)**: {format_metric(best.objective)}",
    ]
    return "\n".join(lines) + "\n"


def delineation_summary_markdown(result: DelineationResult) -> str:
    complete = sum(1 for beat in result.beats if beat.is_complete)
    return (
        "# Delineation\n\n"
        f"- **Beats**: {len(result.beats)} ({complete} with all four points)\n"
        f"- **Windows**: {len(result.windows)}\n"
        f"- **Mean filter length**: {format_metric(result.mean_filter_length, digits=1)}\n"
    )

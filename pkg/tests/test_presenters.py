from icgscan.evaluation import EvalReport, HemoErrorStat, PointScore


def build_report(**overrides) -> EvalReport:
    data = {
        "tolerance_ms": 30.0,
        "records": 30,
        "points": {
            "c": PointScore(tp=900, fp=2, fn=1, se=99.9, ppv=99.8, der=0.3, gmean=99.85, me=3.1, sigma=1.2),
            "b": PointScore(tp=850, fp=50, fn=51, se=94.3, ppv=94.4, der=11.2, gmean=94.35, se_std=2.1),
        },
        "hemo": {"lvet": HemoErrorStat(n=850, abs_mean=6.5, abs_std=3.25, rel_mean=2.0, rel_std=1.0)},
        "filter_length_mean": 12.6,
        "filter_length_std": 3.1,
    }
    data.update(overrides)
    return EvalReport(**data)


def test_format_metric_handles_absent_values_and_spread() -> None:
    from icgscan.presenters import format_metric

    assert format_metric(None) == "-"
    assert format_metric(94.349) == "94.35"
    assert format_metric(94.3, 2.1) == "94.30 ± 2.10"
    assert format_metric(12.6, digits=1) == "12.6"


def test_point_label_falls_back_to_upper_case() -> None:
    from icgscan.presenters import point_label

    assert point_label("b") == "B"
    assert point_label("q") == "Q"


def test_report_summary_markdown_lists_points_in_order() -> None:
    from icgscan.presenters import report_summary_markdown

    content = report_summary_markdown(build_report())

    assert "# Delineation quality" in content
    assert "- **Records**: 30" in content
    assert "- **Tolerance**: ±30 ms" in content
    assert "- **Filter length**: 12.6 ± 3.1" in content
    assert content.index("| B |") < content.index("| C |")
    assert "| 94.30 ± 2.10 |" in content
    assert "| LVET (ms) | 850 | 6.50 ± 3.25 | 2.00 ± 1.00 |" in content


def test_report_summary_without_hemo_or_filter_lengths() -> None:
    from icgscan.presenters import report_summary_markdown

    content = report_summary_markdown(build_report(hemo={}, filter_length_mean=None), title="Record 7")

    assert content.startswith("# Record 7\n")
    assert "Filter length" not in content
    assert "Hemodynamic" not in content


def test_sweep_summary_markdown_has_one_row_per_config() -> None:
    from icgscan.evaluation import SweepResult, SweepRow
    from icgscan.presenters import sweep_summary_markdown

    sweep = SweepResult(
        rows=[
            SweepRow(label="9", filter_length=9, report=build_report(filter_length_mean=9.0)),
            SweepRow(label="adaptive", filter_length=None, report=build_report()),
        ]
    )

    content = sweep_summary_markdown(sweep)

    assert "| 9 | 94.35 | 99.85 | - | - | 9.0 |" in content
    assert "| adaptive |" in content

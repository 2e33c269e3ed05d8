"""
报告生成模块
~~~~~~~~~

将评估、扫描、标定和描记结果生成键值文本、JSON 或 HTML 报告
"""

import html
import logging
import os
from typing import Any, Dict, List, Optional, Tuple

import markdown

from .core import POINT_TYPES
from .evaluation import CalibrationResult, EvalReport, SweepResult
from .pipeline import DelineationResult
from .presenters import (
    calibration_summary_markdown,
    delineation_summary_markdown,
    report_summary_markdown,
    sweep_summary_markdown,
)

logger = logging.getLogger(__name__)

Section = Tuple[str, Dict[str, Any]]


class ReportGenerator:
    """报告生成器基类"""

    def generate_report(self, result, output_path: Optional[str] = None) -> str:
        """生成报告

        Args:
            result: EvalReport、SweepResult、CalibrationResult 或 DelineationResult
            output_path: 输出文件路径(如果为None，则返回报告内容)

        Returns:
            如果output_path为None，则返回报告内容；否则返回输出文件路径
        """
        content = self._generate_content(result)

        if output_path:
            os.makedirs(os.path.dirname(os.path.abspath(output_path)), exist_ok=True)
            with open(output_path, 'w', encoding='utf-8', newline='\n') as f:
                f.write(content)
            logger.info(f"report written to {output_path}")
            return output_path
        return content

    def _generate_content(self, result) -> str:
        """生成报告内容(子类实现)

        Args:
            result: 待输出的结果

        Returns:
            报告内容
        """
        raise NotImplementedError("subclasses implement _generate_content")


def _report_sections(report: EvalReport) -> List[Section]:
    """评估报告的分节: 汇总、每类特征点、每项血流动力学参数"""
    sections: List[Section] = [(
        "summary",
        {
            "records": report.records,
            "tolerance_ms": report.tolerance_ms,
            "filter_length_mean": report.filter_length_mean,
            "filter_length_std": report.filter_length_std,
        },
    )]
    for point in POINT_TYPES:
        if point in report.points:
            sections.append((f"point.{point}", report.points[point].to_dict()))
    for name, stat in report.hemo.items():
        sections.append((f"hemo.{name}", stat.to_dict()))
    return sections


def _sections_for(result) -> List[Section]:
    """按结果类型拆成 (节名, 键值) 列表

    Raises:
        TypeError: 不支持的结果类型
    """
    if isinstance(result, EvalReport):
        return _report_sections(result)
    if isinstance(result, SweepResult):
        return [(f"sweep.{row.label}", row.to_dict()) for row in result.rows]
    if isinstance(result, CalibrationResult):
        sections: List[Section] = [("best", {"index": result.best_index, **result.best_row.overrides})]
        sections.append(("best_params", result.best_params.model_dump()))
        sections += [(f"grid.{row.index}", row.to_dict()) for row in result.rows]
        return sections
    if isinstance(result, DelineationResult):
        return [(
            "delineation",
            {
                "fs": result.fs,
                "beats": len(result.beats),
                "windows": len(result.windows),
                "mean_filter_length": result.mean_filter_length,
            },
        )]
    raise TypeError(f"no report layout for {type(result).__name__}")


def _format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, dict):
        return ", ".join(f"{key}={_format_value(item)}" for key, item in value.items())
    return str(value)


class TextReportGenerator(ReportGenerator):
    """键值文本报告生成器: `[section]` 节头加 `key = value` 行，缺失值留空"""

    def _generate_content(self, result) -> str:
        """生成键值文本报告"""
        lines: List[str] = []
        for name, values in _sections_for(result):
            if lines:
                lines.append("")
            lines.append(f"[{name}]")
            lines.extend(f"{key} = {_format_value(value)}" for key, value in values.items())
        return "\n".join(lines) + "\n"


class JSONReportGenerator(ReportGenerator):
    """JSON报告生成器"""

    def _generate_content(self, result) -> str:
        """生成JSON格式报告"""
        return result.to_json() + "\n"


def _summary_markdown(result) -> str:
    """HTML 报告使用的 Markdown 摘要"""
    if isinstance(result, EvalReport):
        return report_summary_markdown(result)
    if isinstance(result, SweepResult):
        return sweep_summary_markdown(result)
    if isinstance(result, CalibrationResult):
        return calibration_summary_markdown(result)
    if isinstance(result, DelineationResult):
        return delineation_summary_markdown(result)
    raise TypeError(f"no report layout for {type(result).__name__}")


class HTMLReportGenerator(ReportGenerator):
    """HTML报告生成器，将 Markdown 摘要渲染为独立页面"""

    def _generate_content(self, result) -> str:
        """生成HTML格式报告"""
        body = markdown.markdown(_summary_markdown(result), extensions=['markdown.extensions.tables'])
        title = html.escape(type(result).__name__)
        return (
            "<!DOCTYPE html>\n"
            "<html lang=\"en\">\n"
            "<head>\n"
            "<meta charset=\"UTF-8\">\n"
            f"<title>icgscan {title}</title>\n"
            "<style>body { font-family: sans-serif; margin: 2rem; } "
            "table { border-collapse: collapse; } td, th { border: 1px solid #ccc; padding: 4px 8px; }</style>\n"
            "</head>\n"
            f"<body>\n{body}\n</body>\n"
            "</html>\n"
        )


def get_report_generator(format_type: str) -> ReportGenerator:
    """获取报告生成器

    Args:
        format_type: 报告格式(html, json, text)

    Returns:
        报告生成器实例

    Raises:
        ValueError: 不支持的报告格式
    """
    format_type = format_type.lower()

    if format_type == 'html':
        return HTMLReportGenerator()
    elif format_type == 'json':
        return JSONReportGenerator()
    elif format_type == 'text':
        return TextReportGenerator()
    else:
        raise ValueError(f"unsupported report format: {format_type}")


def format_for_path(output_path: str, default: str = 'text') -> str:
    """根据输出文件扩展名确定报告格式

    Args:
        output_path: 输出文件路径
        default: 扩展名无法识别时使用的格式

    Returns:
        报告格式
    """
    extension = os.path.splitext(output_path)[1].lower()
    return {'.json': 'json', '.html': 'html', '.htm': 'html'}.get(extension, default)

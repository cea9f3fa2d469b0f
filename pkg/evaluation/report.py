"""
报告渲染: 每张表同时导出 CSV 和对齐的文本表

百分比保留一位小数, 四舍五入 (half-up)
"""

import csv
import io
import math
import os
import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from core.utils import SafeFileHandler
from corpus.models import ControlFlowClass
from .metrics import MetricReport
from .triage import FailureCategory

logger = logging.getLogger(__name__)

Table = Tuple[List[str], List[List[str]]]


def percent(value: Optional[Fraction]) -> str:
    """Fraction -> 百分比字符串, 例如 65/700 -> '9.3'; None -> '-'"""
    if value is None:
        return "-"
    tenths = math.floor(Fraction(value) * 1000 + Fraction(1, 2))
    return f"{tenths // 10}.{tenths % 10}"


def effectiveness_table(reports: Sequence[MetricReport]) -> Table:
    headers = ["Model", "Success Rate (%)", "Failure Rate (%)", "Completeness (%)"]
    rows = [[r.label, percent(r.sr), percent(r.fr), percent(r.cr)] for r in reports]
    return headers, rows


def robustness_table(reports: Sequence[MetricReport]) -> Table:
    headers = [
        "Model",
        "Base SR (%)",
        "Base FR (%)",
        "Diverse SR (%)",
        "Diverse FR (%)",
        "Flip Rate (%)",
        "Diverse SR weighted (%)",
        "Diverse FR weighted (%)",
    ]
    rows = [
        [
            r.label,
            percent(r.sr),
            percent(r.fr),
            percent(r.diverse_sr),
            percent(r.diverse_fr),
            percent(r.flr),
            percent(r.diverse_sr_weighted),
            percent(r.diverse_fr_weighted),
        ]
        for r in reports
    ]
    return headers, rows


def class_table(reports: Sequence[MetricReport]) -> Table:
    headers = ["Model", "Class", "Count", "SR (%)", "FR (%)"]
    rows = []
    for report in reports:
        for cfc in ControlFlowClass:
            rates = report.per_class.get(cfc)
            if rates is None:
                continue
            rows.append([report.label, cfc.value, str(rates.count), percent(rates.sr), percent(rates.fr)])
    return headers, rows


def failure_table(ranked: Sequence[Tuple[FailureCategory, int]], total: int) -> Table:
    headers = ["Category", "Count", "Share (%)"]
    rows = [
        [str(category), str(count), percent(Fraction(count, total) if total else None)]
        for category, count in ranked
    ]
    return headers, rows


def to_csv(table: Table) -> str:
    headers, rows = table
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(headers)
    writer.writerows(rows)
    return buffer.getvalue()


def to_text(table: Table) -> str:
    headers, rows = table
    widths = [len(h) for h in headers]
    for row in rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]

    def line(cells):
        # 第一列左对齐, 数值列右对齐
        parts = [cells[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(cells[1:], widths[1:])]
        return "  ".join(parts).rstrip()

    out = [line(headers), "  ".join("-" * w for w in widths)]
    out.extend(line(row) for row in rows)
    return "\n".join(out) + "\n"


def write_table(table: Table, directory: str, name: str) -> None:
    SafeFileHandler.atomic_write(os.path.join(directory, f"{name}.csv"), to_csv(table))
    SafeFileHandler.atomic_write(os.path.join(directory, f"{name}.txt"), to_text(table))


def write_report(
    reports: Sequence[MetricReport],
    directory: str,
    failures: Optional[Sequence[Tuple[FailureCategory, int]]] = None,
    failure_total: int = 0,
) -> Dict[str, str]:
    """
    写出全部报告表

    Returns:
        表名 -> 文本表内容
    """
    tables = {
        "effectiveness": effectiveness_table(reports),
        "robustness": robustness_table(reports),
        "per_class": class_table(reports),
    }
    if failures is not None:
        tables["failures"] = failure_table(failures, failure_total)
    rendered = {}
    for name, table in tables.items():
        write_table(table, directory, name)
        rendered[name] = to_text(table)
    summary = "\n".join(f"== {name} ==\n{text}" for name, text in rendered.items())
    SafeFileHandler.atomic_write(os.path.join(directory, "summary.txt"), summary)
    logger.info(f"Wrote {len(tables)} report tables to {directory}")
    return rendered

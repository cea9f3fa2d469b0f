"""
evaluation - 指标计算、失败分诊与报告渲染
"""

from .metrics import (
    ClassRates,
    CostSummary,
    LogEntry,
    MetricReport,
    OutcomeLog,
    build_report,
    completeness_rate,
    corpus_flip_rate,
    failure_rate,
    flip_rate,
    is_failure,
    is_success,
    normalized_metric,
    slice_by_class,
    success_rate,
    unknown_rate,
    weighted_metric,
)
from .triage import (
    AtomicError,
    FailureCategory,
    PatternTable,
    categorize,
    distribution,
    dominant_category,
    split_atomic,
    triage_outcome,
)
from .report import percent, write_report

__all__ = [
    "ClassRates",
    "CostSummary",
    "LogEntry",
    "MetricReport",
    "OutcomeLog",
    "build_report",
    "completeness_rate",
    "corpus_flip_rate",
    "failure_rate",
    "flip_rate",
    "is_failure",
    "is_success",
    "normalized_metric",
    "slice_by_class",
    "success_rate",
    "unknown_rate",
    "weighted_metric",
    "AtomicError",
    "FailureCategory",
    "PatternTable",
    "categorize",
    "distribution",
    "dominant_category",
    "split_atomic",
    "triage_outcome",
    "percent",
    "write_report",
]

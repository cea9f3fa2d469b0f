"""
corpus - 基准语料模型

加载/校验/保存语料清单, 并按语法规则给程序分配控制流类别。
"""

from .models import ControlFlowClass, Corpus, Origin, ProgramRecord, Violation
from .classifier import classify_control_flow
from .loader import load_corpus, save_corpus, validate_record

__all__ = [
    "ControlFlowClass",
    "Corpus",
    "Origin",
    "ProgramRecord",
    "Violation",
    "classify_control_flow",
    "load_corpus",
    "save_corpus",
    "validate_record",
]

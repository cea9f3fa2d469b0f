"""
失败分诊

验证器输出先拆成原子错误, 再用有序模式表 (failure_patterns.json) 逐条匹配类别,
第一条命中的规则生效; 都不命中时归入 Other("unmatched")。
"""

import os
import re
import logging
from collections import Counter
from dataclasses import dataclass
from typing import ClassVar, Dict, Iterable, List, Optional, Pattern, Sequence, Tuple

from core.exceptions import ConfigError
from core.utils import SafeFileHandler
from verifier.models import Diagnostic, OutcomeKind, VerificationOutcome

logger = logging.getLogger(__name__)

DEFAULT_PATTERN_TABLE = os.path.join(os.path.dirname(os.path.abspath(__file__)), "failure_patterns.json")


@dataclass(frozen=True)
class FailureCategory:
    """失败类别; Other 必须带一个非空标签"""

    name: str
    label: str = ""

    OTHER: ClassVar[str] = "Other"
    KNOWN: ClassVar[Tuple[str, ...]] = (
        "SyntaxError",
        "InvalidSpecification",
        "UnsupportedQuantifier",
        "UnsupportedMinMaxQuantifier",
        "PostconditionFailure",
        "LoopInvariantFailure",
        "ArithmeticOperationRange",
        "AssertionFailure",
        "NullDereference",
        "DivideByZero",
        "ArrayIndexFailure",
    )

    def __post_init__(self):
        if self.name == self.OTHER and not self.label:
            raise ValueError("Other category needs a label")
        if self.name != self.OTHER and self.name not in self.KNOWN:
            raise ValueError(f"unknown failure category: {self.name}")

    @classmethod
    def named(cls, name: str, label: str = "") -> "FailureCategory":
        """按名字构造; 未知名字成为 Other(名字)"""
        if name in cls.KNOWN:
            return cls(name)
        if name == cls.OTHER:
            return cls(cls.OTHER, label or "unmatched")
        return cls(cls.OTHER, name)

    @classmethod
    def parse(cls, text: str) -> "FailureCategory":
        """str() 的逆"""
        match = re.fullmatch(r"Other\((.+)\)", text)
        if match:
            return cls(cls.OTHER, match.group(1))
        return cls.named(text)

    @property
    def is_other(self) -> bool:
        return self.name == self.OTHER

    def __str__(self) -> str:
        return f"Other({self.label})" if self.is_other else self.name


UNMATCHED = FailureCategory(FailureCategory.OTHER, "unmatched")
INVALID_SPECIFICATION = FailureCategory("InvalidSpecification")


@dataclass(frozen=True)
class PatternRule:
    pattern: str
    category: FailureCategory
    compiled: Optional[Pattern] = None
    note: str = ""

    def match(self, message: str) -> Optional[str]:
        """命中时返回消息中被匹配的子串"""
        if self.compiled is not None:
            found = self.compiled.search(message)
            return found.group(0) if found else None
        return self.pattern if self.pattern in message else None


class PatternTable:
    """有序的 (模式 -> 类别) 规则表"""

    def __init__(self, rules: Sequence[PatternRule]):
        self.rules = list(rules)

    def __len__(self) -> int:
        return len(self.rules)

    @classmethod
    def from_rules(cls, rows: Iterable[Dict]) -> "PatternTable":
        rules = []
        for index, row in enumerate(rows):
            pattern = row.get("pattern", "")
            if not pattern:
                raise ConfigError(f"pattern rule {index} has an empty pattern", field="pattern_table")
            name = row.get("category", "")
            category = FailureCategory.named(name, row.get("label", ""))
            if category.is_other and name != FailureCategory.OTHER:
                logger.warning(f"Pattern rule {index} names unknown category {name}, using {category}")
            compiled = None
            if row.get("regex"):
                try:
                    compiled = re.compile(pattern)
                except re.error as e:
                    raise ConfigError(f"pattern rule {index} is not a valid regex: {e}", field="pattern_table")
            rules.append(PatternRule(pattern, category, compiled, row.get("note", "")))
        return cls(rules)

    @classmethod
    def load(cls, path: Optional[str] = None) -> "PatternTable":
        """
        加载模式表文件, 默认使用随包发布的 failure_patterns.json

        Raises:
            ConfigError: 文件缺失或格式错误
        """
        path = path or DEFAULT_PATTERN_TABLE
        data = SafeFileHandler.read_json(path)
        if not isinstance(data, dict) or not isinstance(data.get("rules"), list):
            raise ConfigError(f"invalid pattern table: {path}", field="pattern_table")
        table = cls.from_rules(data["rules"])
        logger.debug(f"Loaded {len(table)} failure patterns from {path}")
        return table


@dataclass(frozen=True)
class AtomicError:
    diagnostic: Diagnostic
    category: FailureCategory
    matched_pattern: str = ""

    def to_row(self, record_id: str = "") -> Dict[str, object]:
        return {
            "record_id": record_id,
            "file": self.diagnostic.file,
            "line": self.diagnostic.line if self.diagnostic.line is not None else "",
            "category": str(self.category),
            "matched_pattern": self.matched_pattern,
            "message": self.diagnostic.raw_message,
        }


def split_atomic(diagnostics: Sequence[Diagnostic]) -> List[Diagnostic]:
    """
    拆分原子错误: 每条证明义务消息一个候选, 相同 (行号, 消息) 只保留第一条
    """
    seen = set()
    atoms = []
    for diagnostic in diagnostics:
        if not diagnostic.is_obligation:
            continue
        key = (diagnostic.line, diagnostic.raw_message)
        if key in seen:
            continue
        seen.add(key)
        atoms.append(diagnostic)
    return atoms


def categorize(error: Diagnostic, patterns: PatternTable) -> FailureCategory:
    return match_error(error, patterns).category


def match_error(error: Diagnostic, patterns: PatternTable) -> AtomicError:
    """按规则顺序匹配, 第一条命中的规则决定类别"""
    for rule in patterns.rules:
        matched = rule.match(error.raw_message)
        if matched is not None:
            return AtomicError(error, rule.category, matched)
    return AtomicError(error, UNMATCHED, "")


def triage_outcome(outcome: VerificationOutcome, patterns: PatternTable) -> List[AtomicError]:
    """
    一次验证结果的原子错误

    Invalid 结果没有诊断, 记为一条 InvalidSpecification 错误; Success 没有错误
    """
    if outcome.kind == OutcomeKind.INVALID:
        message = f"InvalidSpecification: {outcome.raw_output or 'no specification'}"
        return [match_error(Diagnostic(file="", line=None, raw_message=message, kind="invalid"), patterns)]
    return [match_error(d, patterns) for d in split_atomic(outcome.diagnostics)]


def distribution(errors: Sequence[AtomicError], k: int) -> List[Tuple[FailureCategory, int]]:
    """
    类别分布的前 k 项, 按数量降序, 数量相同时按类别名升序

    Raises:
        ValueError: k < 1
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    counts = Counter(e.category for e in errors)
    ranked = sorted(counts.items(), key=lambda item: (-item[1], str(item[0])))
    return ranked[:k]


def dominant_category(errors: Sequence[AtomicError]) -> Optional[FailureCategory]:
    """出现最多的类别 (并列时取名字靠前的)"""
    if not errors:
        return None
    return distribution(errors, 1)[0][0]

"""
语料数据模型
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Tuple


class ControlFlowClass(str, Enum):
    """控制流类别, 按支配顺序从低到高排列"""

    SEQUENTIAL = "Sequential"
    BRANCHING = "Branching"
    SINGLE_PATH_LOOP = "SinglePathLoop"
    MULTI_PATH_LOOP = "MultiPathLoop"
    NESTED_LOOP = "NestedLoop"

    @property
    def rank(self) -> int:
        return list(ControlFlowClass).index(self)

    @property
    def is_loop(self) -> bool:
        return self.rank >= ControlFlowClass.SINGLE_PATH_LOOP.rank


@dataclass(frozen=True)
class Origin:
    """记录来源: base, 或由某个变换从父记录生成"""

    kind: str = "base"
    parent_id: Optional[str] = None
    transform_id: Optional[str] = None

    @property
    def is_base(self) -> bool:
        return self.kind == "base"

    def __str__(self) -> str:
        if self.is_base:
            return "base"
        return f"transformed:{self.parent_id}:{self.transform_id}"

    @classmethod
    def parse(cls, text: str) -> "Origin":
        if not text or text == "base":
            return cls()
        # 父 id 可能含冒号, 变换名不含
        kind, rest = text.split(":", 1)
        parent_id, transform_id = rest.rsplit(":", 1)
        return cls(kind, parent_id, transform_id)

    @classmethod
    def transformed(cls, parent_id: str, transform_id: str) -> "Origin":
        return cls("transformed", parent_id, transform_id)


@dataclass(frozen=True)
class ProgramRecord:
    id: str
    bare_source: str
    intent: str
    cfc: ControlFlowClass
    origin: Origin = field(default_factory=Origin)

    @property
    def parent_id(self) -> str:
        """基础记录的父 id 是它自己"""
        return self.origin.parent_id or self.id


@dataclass(frozen=True)
class Violation:
    """记录校验问题"""

    kind: str  # ParseError | AnnotationPresent | DanglingParent | UnknownTransform | ClassMismatch
    record_id: str
    detail: str = ""


@dataclass
class Corpus:
    records: List[ProgramRecord]
    name: str = "corpus"
    version: str = "1"

    def __post_init__(self):
        self._by_id: Dict[str, ProgramRecord] = {r.id: r for r in self.records}

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[ProgramRecord]:
        return iter(self.records)

    def __contains__(self, record_id: str) -> bool:
        return record_id in self._by_id

    def get(self, record_id: str) -> Optional[ProgramRecord]:
        return self._by_id.get(record_id)

    def class_counts(self) -> Dict[str, int]:
        """各控制流类别的记录数 (按类别顺序, 含 0)"""
        counts = {c.value: 0 for c in ControlFlowClass}
        for record in self.records:
            counts[record.cfc.value] += 1
        return counts

    @property
    def manifest_meta(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "version": self.version,
            "counts": self.class_counts(),
            "total": len(self.records),
        }

    def groups(self) -> Dict[str, List[ProgramRecord]]:
        """变换记录按父 id 分组 (保持插入顺序)"""
        grouped: Dict[str, List[ProgramRecord]] = {}
        for record in self.records:
            grouped.setdefault(record.parent_id, []).append(record)
        return grouped

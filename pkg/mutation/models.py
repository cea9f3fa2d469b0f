"""
变异体数据模型
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, List, Tuple


class MutationOperator(str, Enum):
    RELATIONAL_OP_REPLACE = "RelationalOpReplace"
    ARITHMETIC_OP_REPLACE = "ArithmeticOpReplace"
    LOGICAL_CONNECTOR_REPLACE = "LogicalConnectorReplace"
    UNARY_INSERT = "UnaryInsert"
    LITERAL_REPLACE = "LiteralReplace"
    STATEMENT_DELETE = "StatementDelete"

    @classmethod
    def resolve(cls, names) -> List["MutationOperator"]:
        """名字列表 -> 按枚举顺序排列的算子列表 (空表示全部)"""
        if not names:
            return list(cls)
        wanted = {cls(n) for n in names}
        return [op for op in cls if op in wanted]


@dataclass(frozen=True)
class Mutant:
    """
    单点变异体

    site 是父程序中被替换的字节区间, replacement 为替换文本
    """

    id: str
    source: str
    parent_id: str
    operator: MutationOperator
    site: Tuple[int, int]
    replacement: str
    suppressed: bool = False

    def to_row(self) -> Dict[str, Any]:
        return {
            "parent_id": self.parent_id,
            "mutant_id": self.id,
            "operator": self.operator.value,
            "site_start": self.site[0],
            "site_end": self.site[1],
            "suppressed": int(self.suppressed),
        }


@dataclass
class MutantSet:
    """一个父程序的变异体; mutants 不含被判为等价而抑制的变异体"""

    parent_id: str
    parent_source: str
    mutants: List[Mutant] = field(default_factory=list)
    suppressed: List[Mutant] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.mutants)

    def __iter__(self) -> Iterator[Mutant]:
        return iter(self.mutants)

    def by_operator(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for mutant in self.mutants:
            counts[mutant.operator.value] = counts.get(mutant.operator.value, 0) + 1
        return counts

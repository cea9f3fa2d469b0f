"""
从模型回复中抽取带规格的程序
"""

import re
import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

from astcore.annotations import SpecifiedProgram, count_spec_comments, same_code, strip_annotations
from astcore.syntax import parse
from core.exceptions import ParseFailure
from corpus.models import ProgramRecord
from .prompts import FIXED_MARKER, SPECIFICATION_MARKER

logger = logging.getLogger(__name__)

FENCE_RE = re.compile(r"```[ \t]*[\w+#.-]*[ \t]*\r?\n(.*?)```", re.DOTALL)


class InvalidReason(str, Enum):
    NO_CODE_BLOCK = "NoCodeBlock"
    PARSE_ERROR = "ParseError"
    BODY_CHANGED = "BodyChanged"
    NO_ANNOTATIONS = "NoAnnotations"


@dataclass(frozen=True)
class Extraction:
    """抽取结果: program 与 reason 恰有一个非空"""

    program: Optional[SpecifiedProgram] = None
    reason: Optional[InvalidReason] = None
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.program is not None

    def to_row(self, record_id: str) -> dict:
        return {
            "record_id": record_id,
            "status": "ok" if self.ok else "invalid",
            "reason": self.reason.value if self.reason else "",
            "detail": self.detail,
        }


def code_blocks(text: str) -> List[str]:
    return [m.group(1) for m in FENCE_RE.finditer(text)]


def _block_after(text: str, marker: str) -> Optional[str]:
    position = text.rfind(marker)
    if position < 0:
        return None
    blocks = code_blocks(text[position + len(marker):])
    return blocks[0] if blocks else None


def validate_candidate(source: str, record: ProgramRecord) -> Extraction:
    """校验候选源码: 可解析、剥离注解后与原程序一致、至少含一条规格注释"""
    try:
        parse(source)
        bare, index = strip_annotations(source)
    except ParseFailure as e:
        return Extraction(reason=InvalidReason.PARSE_ERROR, detail=e.message)
    if not same_code(bare, record.bare_source):
        return Extraction(reason=InvalidReason.BODY_CHANGED, detail="code differs from the record")
    if count_spec_comments(source) == 0:
        return Extraction(reason=InvalidReason.NO_ANNOTATIONS, detail="no JML annotations")
    return Extraction(program=SpecifiedProgram(source, index, record.id))


def extract_specification(response: str, record: ProgramRecord, prefer_marker: bool = False) -> Extraction:
    """
    抽取生成回复中的规格: 取第一个代码块

    Args:
        response: 模型回复
        record: 目标记录
        prefer_marker: 为 True 时 (LTM 风格) 优先取 ### SPECIFICATION 之后的代码块
    """
    block = _block_after(response, SPECIFICATION_MARKER) if prefer_marker else None
    if block is None:
        blocks = code_blocks(response)
        if not blocks:
            return Extraction(reason=InvalidReason.NO_CODE_BLOCK, detail="response has no fenced code block")
        block = blocks[0]
    return validate_candidate(block, record)


def extract_repair(response: str, record: ProgramRecord) -> Extraction:
    """抽取修复回复: 要求 ### FIXED SPECIFICATION 之后的代码块, 缺失时退回最后一个代码块"""
    block = _block_after(response, FIXED_MARKER)
    if block is None:
        blocks = code_blocks(response)
        if not blocks:
            return Extraction(reason=InvalidReason.NO_CODE_BLOCK, detail="response has no fenced code block")
        logger.warning(f"Repair response for {record.id} lacks {FIXED_MARKER}, using the last code block")
        block = blocks[-1]
    return validate_candidate(block, record)

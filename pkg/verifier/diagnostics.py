"""
验证器输出解析与结果分类

OpenJML 的每条记录形如::

    /tmp/Sum.java:21: verify: The prover cannot establish an assertion (PossiblyTooLargeIndex) in method sum

其后可能跟着源码摘录和指示列的 ^ 行, 这些行并入上一条记录的 context。
"""

import re
import logging
from typing import Iterable, List, Optional, Sequence

from .models import Diagnostic, OutcomeKind

logger = logging.getLogger(__name__)

RECORD_RE = re.compile(r"^(?P<file>[^\s:][^:]*?):(?P<line>\d+):\s*(?P<kind>verify|error|warning):\s*(?P<message>.*)$")
SUMMARY_RE = re.compile(r"^\d+ (verification )?(failures?|errors?|warnings?)\s*$")
# 只有证明相关的 warning 算作诊断
COUNTED_WARNING = "cannot establish"
# 关联声明记录并入上一条诊断
ASSOCIATED = "Associated declaration"


def parse_diagnostics(raw_output: str) -> List[Diagnostic]:
    """
    把验证器原始输出解析成诊断列表

    Args:
        raw_output: 验证器的标准输出和标准错误

    Returns:
        按出现顺序排列的诊断; 出现在任何记录之前的非空行作为无位置诊断保留
    """
    diagnostics: List[Diagnostic] = []
    current: Optional[dict] = None
    skipping = False

    def flush():
        if current is not None:
            diagnostics.append(
                Diagnostic(
                    file=current["file"],
                    line=current["line"],
                    raw_message=current["message"],
                    kind=current["kind"],
                    context=tuple(current["context"]),
                )
            )

    for line in raw_output.splitlines():
        text = line.rstrip()
        if not text.strip() or SUMMARY_RE.match(text.strip()):
            continue
        match = RECORD_RE.match(text)
        if match:
            if current is not None and match.group("message").startswith(ASSOCIATED):
                current["context"].append(text)
                continue
            flush()
            current = None
            kind = match.group("kind")
            message = match.group("message").strip() or text
            skipping = kind == "warning" and COUNTED_WARNING not in message
            if not skipping:
                current = {
                    "file": match.group("file"),
                    "line": int(match.group("line")),
                    "message": message,
                    "kind": kind,
                    "context": [],
                }
            continue
        if current is not None:
            current["context"].append(text)
        elif not skipping:
            diagnostics.append(Diagnostic(file="", line=None, raw_message=text.strip(), kind="output"))

    flush()
    return diagnostics


def is_inconclusive(raw_output: str, markers: Iterable[str]) -> bool:
    return any(marker and marker in raw_output for marker in markers)


def classify_outcome(
    exit_status: Optional[int],
    diagnostics: Sequence[Diagnostic],
    timed_out: bool,
    spec_parse_ok: bool,
    inconclusive: bool = False,
) -> OutcomeKind:
    """
    结果分类, 仅依赖参数 (回放可复现)

    规则依次为: 规格无法解析 -> Invalid; 超时或验证器报告无法判定 -> Unknown;
    存在证明义务诊断 -> Failure; 非零退出且没有诊断 -> Unknown; 否则 Success
    """
    if not spec_parse_ok:
        return OutcomeKind.INVALID
    if timed_out or inconclusive:
        return OutcomeKind.UNKNOWN
    if any(d.is_obligation for d in diagnostics):
        return OutcomeKind.FAILURE
    if exit_status not in (None, 0):
        return OutcomeKind.UNKNOWN
    return OutcomeKind.SUCCESS

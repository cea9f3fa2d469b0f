"""
按失败类别引导的自修复循环, 以及规格变异修复兜底

每一轮: 生成 (或修复) -> 验证 -> 分诊 -> 以主导类别选择修复模板。
修复提示只包含最新的规格和最新的错误。
"""

import re
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

from astcore.annotations import (
    AnnotationIndex,
    SpecifiedProgram,
    embed_annotations,
    strip_annotations,
    with_clause_edit,
    without_clause,
)
from core.exceptions import BackendUnavailable, HarnessError, ModelError
from core.utils import ProgressTracker, timing_decorator
from corpus.models import ProgramRecord
from evaluation.triage import AtomicError, FailureCategory, PatternTable, distribution, triage_outcome
from verifier.backends import VerifierBackend
from verifier.models import Diagnostic, OutcomeKind, VerificationOutcome, VerifierConfig
from verifier.runner import verify
from .clients import Completion, ModelClient, transcript_entry
from .extraction import Extraction, extract_repair, extract_specification
from .prompts import Demonstration, PromptBundle, PromptStyle, build_prompt, build_repair_prompt

logger = logging.getLogger(__name__)


class RepairTerminal(str, Enum):
    SUCCESS = "Success"
    EXHAUSTED = "Exhausted"
    INVALID = "Invalid"


@dataclass
class RepairIteration:
    index: int
    prompt: PromptBundle
    completion: Completion
    extraction: Extraction
    outcome: VerificationOutcome
    errors: List[AtomicError] = field(default_factory=list)
    dominant: Optional[str] = None

    @property
    def categories(self) -> List[Tuple[str, int]]:
        return [(str(c), n) for c, n in distribution(self.errors, max(1, len(self.errors)))] if self.errors else []

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "prompt": self.prompt.to_dict(),
            "response": self.completion.text,
            "tokens": self.completion.total_tokens,
            "extraction": self.extraction.to_row(""),
            "specification": self.extraction.program.source if self.extraction.ok else None,
            "outcome": self.outcome.to_dict(),
            "categories": [{"category": c, "count": n} for c, n in self.categories],
            "dominant": self.dominant,
        }


@dataclass
class MutationRepairResult:
    program: Optional[SpecifiedProgram]
    edit: str = ""
    calls: int = 0
    reason: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "repaired": self.program is not None,
            "edit": self.edit,
            "calls": self.calls,
            "reason": self.reason,
            "specification": self.program.source if self.program else None,
        }


@dataclass
class RepairTrace:
    """一个记录的修复轨迹; terminal 为 Success 时最后一轮结果必为 Success"""

    record_id: str
    iterations: List[RepairIteration] = field(default_factory=list)
    terminal: Optional[RepairTerminal] = None
    fallback: Optional[MutationRepairResult] = None

    @property
    def final_program(self) -> Optional[SpecifiedProgram]:
        if self.fallback is not None and self.fallback.program is not None:
            return self.fallback.program
        for iteration in reversed(self.iterations):
            if iteration.extraction.ok:
                return iteration.extraction.program
        return None

    @property
    def success_iteration(self) -> Optional[int]:
        if self.terminal == RepairTerminal.SUCCESS:
            return self.iterations[-1].index
        return None

    @property
    def tokens(self) -> int:
        return sum(i.completion.total_tokens for i in self.iterations)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "record_id": self.record_id,
            "terminal": self.terminal.value if self.terminal else None,
            "iterations": [i.to_dict() for i in self.iterations],
            "fallback": self.fallback.to_dict() if self.fallback else None,
        }

    def transcript(self) -> List[Dict[str, Any]]:
        return [transcript_entry(i.prompt, i.completion, iteration=i.index) for i in self.iterations]


def _check(
    extraction: Extraction,
    config: VerifierConfig,
    backend: VerifierBackend,
    patterns: PatternTable,
    archive=None,
) -> Tuple[VerificationOutcome, List[AtomicError]]:
    if extraction.ok:
        outcome = verify(extraction.program, config, backend, archive)
    else:
        outcome = VerificationOutcome.invalid(f"{extraction.reason.value}: {extraction.detail}")
    return outcome, triage_outcome(outcome, patterns)


def self_repair(
    record: ProgramRecord,
    client: ModelClient,
    config: VerifierConfig,
    backend: VerifierBackend,
    patterns: PatternTable,
    max_iters: int,
    style: PromptStyle = PromptStyle.ZERO_SHOT,
    demos: Sequence[Demonstration] = (),
    archive=None,
) -> RepairTrace:
    """
    自修复循环: 验证成功或达到 max_iters 后停止

    Args:
        record: 目标记录
        client: 模型客户端
        config: 验证器参数
        backend: 验证器后端
        patterns: 失败模式表
        max_iters: 最大轮数 (含第一轮生成)
        style: 第一轮生成的提示风格

    Returns:
        RepairTrace

    Raises:
        ValueError: max_iters < 1
        BackendUnavailable / ModelError: 中止循环; 异常的 partial_trace 属性带有已完成的轮次
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    trace = RepairTrace(record.id)
    prompt = build_prompt(style, record, demos)
    latest = SpecifiedProgram(record.bare_source, AnnotationIndex(), record.id)

    try:
        for index in range(1, max_iters + 1):
            completion = client.complete(prompt, record.id)
            if index == 1:
                extraction = extract_specification(
                    completion.text, record, prefer_marker=style == PromptStyle.LTM
                )
            else:
                extraction = extract_repair(completion.text, record)
            outcome, errors = _check(extraction, config, backend, patterns, archive)
            iteration = RepairIteration(index, prompt, completion, extraction, outcome, errors)
            trace.iterations.append(iteration)
            if extraction.ok:
                latest = extraction.program

            if outcome.kind == OutcomeKind.SUCCESS:
                trace.terminal = RepairTerminal.SUCCESS
                logger.info(f"Record {record.id} verified at iteration {index}")
                break

            ranked = distribution(errors, 1) if errors else []
            dominant = ranked[0][0] if ranked else None
            iteration.dominant = str(dominant) if dominant else None
            logger.info(
                f"Record {record.id} iteration {index}: {outcome.kind.value}, "
                f"dominant category {iteration.dominant or '-'} of {len(errors)} errors"
            )
            if index < max_iters:
                if dominant is None:
                    # Unknown 等没有原子错误的结果走通用模板
                    dominant = FailureCategory.named(FailureCategory.OTHER, outcome.kind.value)
                    note = outcome.raw_output.strip() or f"verification result: {outcome.kind.value}"
                    errors = [AtomicError(Diagnostic(file="", line=None, raw_message=note), dominant)]
                prompt = build_repair_prompt(dominant, latest, errors)
    except (BackendUnavailable, ModelError) as e:
        logger.error(f"Repair of {record.id} aborted after {len(trace.iterations)} iterations: {e.message}")
        e.partial_trace = trace
        raise

    if trace.terminal is None:
        last = trace.iterations[-1]
        trace.terminal = RepairTerminal.EXHAUSTED if last.extraction.ok else RepairTerminal.INVALID
    return trace


_GREATER = re.compile(r"(?<![=<>\-])>(?![=>])")
_LESS = re.compile(r"(?<![<=])<(?![=<:])")


def _weakenings(entry_text: str, start: int, end: int) -> Iterator[Tuple[int, int, str]]:
    """子句内的严格比较放宽一步: > 变 >=, < 变 <="""
    segment = entry_text[start:end]
    for pattern, replacement in ((_GREATER, ">="), (_LESS, "<=")):
        for match in pattern.finditer(segment):
            yield start + match.start(), start + match.end(), replacement


def mutation_candidates(index: AnnotationIndex) -> Iterator[Tuple[AnnotationIndex, str]]:
    """按固定顺序枚举规格编辑: 先逐个删除非 requires 子句, 再逐个放宽严格比较"""
    for entry_no, entry in enumerate(index.entries):
        for clause_no, clause in enumerate(entry.clauses):
            if clause.kind == "requires":
                continue
            yield without_clause(index, entry_no, clause_no), f"drop `{clause.text}`"
    for entry_no, entry in enumerate(index.entries):
        for clause in entry.clauses:
            if clause.kind == "requires":
                continue
            for start, end, replacement in _weakenings(entry.text, clause.start, clause.end):
                edited = with_clause_edit(index, entry_no, start, end, replacement)
                yield edited, f"weaken `{clause.text}` at offset {start - clause.start} to {replacement}"


def spec_mutation_repair(
    program: SpecifiedProgram,
    config: VerifierConfig,
    backend: VerifierBackend,
    budget: int,
    archive=None,
) -> MutationRepairResult:
    """
    规格变异修复兜底: 依次尝试规格编辑, 返回第一个验证成功的版本

    Args:
        program: 验证失败的规格
        budget: 验证器调用次数上限

    Raises:
        ValueError: budget < 1
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    bare, index = strip_annotations(program)
    calls = 0
    for candidate, description in mutation_candidates(index):
        if calls >= budget:
            logger.info(f"Mutation repair of {program.base_id} exhausted its budget of {budget}")
            return MutationRepairResult(None, calls=calls, reason="BudgetExhausted")
        try:
            edited = embed_annotations(bare, candidate, program.base_id)
        except HarnessError as e:
            logger.debug(f"Skipping spec edit {description}: {e.message}")
            continue
        calls += 1
        outcome = verify(edited, config, backend, archive)
        if outcome.kind == OutcomeKind.SUCCESS:
            logger.info(f"Mutation repair of {program.base_id} succeeded: {description}")
            return MutationRepairResult(edited, description, calls)
    return MutationRepairResult(None, calls=calls, reason="NoVerifyingEdit")


def repair_record(
    record: ProgramRecord,
    client: ModelClient,
    config: VerifierConfig,
    backend: VerifierBackend,
    patterns: PatternTable,
    max_iters: int,
    style: PromptStyle = PromptStyle.ZERO_SHOT,
    demos: Sequence[Demonstration] = (),
    mutation_fallback: bool = False,
    mutation_budget: int = 10,
    archive=None,
) -> RepairTrace:
    """自修复循环, 按需在最后一轮失败后接规格变异修复"""
    trace = self_repair(record, client, config, backend, patterns, max_iters, style, demos, archive)
    last = trace.iterations[-1]
    if (
        mutation_fallback
        and trace.terminal == RepairTerminal.EXHAUSTED
        and last.outcome.kind == OutcomeKind.FAILURE
    ):
        trace.fallback = spec_mutation_repair(last.extraction.program, config, backend, mutation_budget, archive)
    return trace


@timing_decorator
def repair_many(records: Sequence[ProgramRecord], workers: int = 1, **kwargs: Any) -> List[RepairTrace]:
    """不同记录的修复循环并行执行, 结果按输入顺序返回"""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    tracker = ProgressTracker(len(records), "Repairing specifications")
    tracker.start()

    def job(record: ProgramRecord) -> RepairTrace:
        try:
            return repair_record(record, **kwargs)
        finally:
            tracker.update()

    with ThreadPoolExecutor(max_workers=workers) as executor:
        traces = list(executor.map(job, records))
    tracker.finish()
    return traces

"""
验证调度: 单次验证与有界并发的批量验证
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

from astcore.annotations import SpecifiedProgram
from astcore.syntax import parses
from core.utils import ProgressTracker, hash_data, timing_decorator
from .backends import VerifierBackend
from .diagnostics import classify_outcome, is_inconclusive, parse_diagnostics
from .models import OutcomeKind, VerificationOutcome, VerifierConfig

logger = logging.getLogger(__name__)


def archive_key(source: str, config: VerifierConfig, backend: VerifierBackend) -> str:
    return hash_data("\0".join([backend.name, config.signature(), source]))


def verify(
    program: SpecifiedProgram,
    config: VerifierConfig,
    backend: VerifierBackend,
    archive=None,
) -> VerificationOutcome:
    """
    验证一个带规格的程序

    Args:
        program: 带规格的程序
        config: 验证器参数
        backend: 验证器后端
        archive: 可选的结果归档 (ResultArchive), 命中时不再调用后端

    Returns:
        VerificationOutcome; 超时为 Unknown

    Raises:
        BackendUnavailable: 后端无法运行
    """
    source = program.source
    if not parses(source):
        logger.debug(f"Specification for {program.base_id or 'program'} does not parse")
        return VerificationOutcome.invalid("specified program does not parse")

    key = archive_key(source, config, backend) if archive is not None else None
    if key is not None:
        cached = archive.get(key)
        if cached is not None:
            return VerificationOutcome.from_dict(cached)

    run = backend.run(source, config)
    diagnostics = parse_diagnostics(run.output)
    kind = classify_outcome(
        run.exit_status,
        diagnostics,
        run.timed_out,
        True,
        is_inconclusive(run.output, config.inconclusive_markers),
    )
    kept = () if kind == OutcomeKind.SUCCESS else tuple(diagnostics)
    if run.timed_out:
        kept = ()
    outcome = VerificationOutcome(
        kind=kind,
        diagnostics=kept,
        wall_time=run.wall_time,
        raw_output=run.output,
        exit_status=run.exit_status,
        timed_out=run.timed_out,
    )
    if key is not None and not run.timed_out:
        archive.put(key, outcome.to_dict(), base_id=program.base_id, backend=backend.name)
    return outcome


@timing_decorator
def verify_many(
    programs: Sequence[SpecifiedProgram],
    config: VerifierConfig,
    backend: VerifierBackend,
    workers: int = 1,
    archive=None,
    description: str = "Verifying",
) -> List[VerificationOutcome]:
    """
    批量验证, 各任务相互独立; 结果按提交顺序返回

    Args:
        programs: 待验证程序
        config: 验证器参数
        backend: 验证器后端
        workers: 工作线程数上限
        archive: 可选的结果归档

    Returns:
        与 programs 一一对应的结果列表
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    tracker = ProgressTracker(len(programs), description)
    tracker.start()

    def job(program: SpecifiedProgram) -> VerificationOutcome:
        try:
            return verify(program, config, backend, archive)
        finally:
            tracker.update()

    with ThreadPoolExecutor(max_workers=workers) as executor:
        outcomes = list(executor.map(job, programs))
    tracker.finish()

    counts = {}
    for outcome in outcomes:
        counts[outcome.kind.value] = counts.get(outcome.kind.value, 0) + 1
    logger.info(f"{description} done: {counts}")
    return outcomes

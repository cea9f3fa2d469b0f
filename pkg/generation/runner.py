"""
规格生成: 构造提示、调用模型、抽取规格
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence

from core.utils import ProgressTracker, timing_decorator
from corpus.models import ProgramRecord
from .clients import Completion, ModelClient, transcript_entry
from .extraction import Extraction, extract_specification
from .prompts import Demonstration, PromptBundle, PromptStyle, build_prompt

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GenerationResult:
    record_id: str
    prompt: PromptBundle
    completion: Completion
    extraction: Extraction

    def transcript(self) -> List[Dict[str, Any]]:
        return [
            transcript_entry(
                self.prompt,
                self.completion,
                extraction=self.extraction.to_row(self.record_id),
            )
        ]


def generate_specification(
    record: ProgramRecord,
    style: PromptStyle,
    client: ModelClient,
    demos: Sequence[Demonstration] = (),
) -> GenerationResult:
    """
    为一个记录生成规格

    Raises:
        MissingDemos: 风格需要示例但没有提供
        ModelError: 模型调用失败
    """
    style = PromptStyle(style)
    bundle = build_prompt(style, record, demos)
    completion = client.complete(bundle, record.id)
    extraction = extract_specification(completion.text, record, prefer_marker=style == PromptStyle.LTM)
    if not extraction.ok:
        logger.info(f"Invalid response for {record.id}: {extraction.reason.value} ({extraction.detail})")
    return GenerationResult(record.id, bundle, completion, extraction)


@timing_decorator
def generate_many(
    records: Sequence[ProgramRecord],
    style: PromptStyle,
    client: ModelClient,
    demos: Sequence[Demonstration] = (),
    workers: int = 1,
) -> List[GenerationResult]:
    """并发生成, 结果按输入顺序返回"""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    tracker = ProgressTracker(len(records), "Generating specifications")
    tracker.start()

    def job(record: ProgramRecord) -> GenerationResult:
        try:
            return generate_specification(record, style, client, demos)
        finally:
            tracker.update()

    with ThreadPoolExecutor(max_workers=workers) as executor:
        results = list(executor.map(job, records))
    tracker.finish()
    invalid = sum(1 for r in results if not r.extraction.ok)
    logger.info(f"Generated {len(results)} responses, {invalid} invalid")
    return results

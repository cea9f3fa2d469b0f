"""
变体语料构建

- Diverse: 每个基础记录在每种可应用变换下的一个变体
- Diverse-N: 按自然度全局排序保留较好的一部分, 只保留剩余变体数不少于阈值的父程序
"""

import csv
import io
import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from core.config import PERFORMANCE_CONFIG, TRANSFORM_CONFIG
from core.exceptions import HarnessError
from core.utils import ProgressTracker, SafeFileHandler, timing_decorator
from corpus.classifier import classify_control_flow
from corpus.models import Corpus, Origin, ProgramRecord
from .base import TransformContext, TransformId, apply
from .naturalness import LanguageModelScorer, NgramScorer, naturalness

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScoredVariant:
    record: ProgramRecord
    transform: TransformId
    score: float
    kept: bool = False


def variant_id(parent_id: str, transform: TransformId) -> str:
    return f"{parent_id}__{transform.value}"


def resolve_transforms(names: Optional[Sequence[str]] = None) -> List[TransformId]:
    """配置中的变换名列表 -> TransformId 列表 (空表示全部 18 种)"""
    if not names:
        return list(TransformId)
    return sorted({TransformId(n) for n in names}, key=lambda t: t.order)


def _variants_of(
    record: ProgramRecord, transforms: List[TransformId], context: TransformContext
) -> Tuple[ProgramRecord, Dict[TransformId, Optional[ProgramRecord]]]:
    produced: Dict[TransformId, Optional[ProgramRecord]] = {}
    for transform in transforms:
        try:
            result = apply(transform, record.bare_source, context)
        except HarnessError as e:
            logger.error(f"{transform.value} failed on {record.id}: {e.message}")
            raise
        if not result.applicable:
            produced[transform] = None
            continue
        produced[transform] = ProgramRecord(
            id=variant_id(record.id, transform),
            bare_source=result.variant_source,
            intent=record.intent,
            cfc=classify_control_flow(result.variant_source),
            origin=Origin.transformed(record.id, transform.value),
        )
    return record, produced


@timing_decorator
def generate_variants(
    corpus: Corpus,
    transforms: Optional[Sequence[str]] = None,
    context: Optional[TransformContext] = None,
    workers: int = PERFORMANCE_CONFIG["parallel_threads"],
) -> Tuple[Corpus, List[Dict[str, object]]]:
    """
    对语料中每个基础记录应用所有变换

    Args:
        corpus: 基础语料
        transforms: 变换名列表, 空表示全部
        context: 变换选项
        workers: 并行线程数

    Returns:
        (Diverse 语料, 可应用性矩阵行)

    Raises:
        ParseFailure: 基础记录无法解析
        RewriteConflict: 改写结果无法解析
    """
    selected = resolve_transforms(transforms)
    context = context or TransformContext()
    bases = [r for r in corpus.records if r.origin.is_base]
    tracker = ProgressTracker(len(bases), "Applying transforms")
    tracker.start()

    def job(record: ProgramRecord):
        outcome = _variants_of(record, selected, context)
        tracker.update()
        return outcome

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        results = list(executor.map(job, bases))
    tracker.finish()

    variants: List[ProgramRecord] = []
    matrix: List[Dict[str, object]] = []
    for record, produced in results:
        row: Dict[str, object] = {"record_id": record.id}
        for transform in selected:
            variant = produced[transform]
            row[transform.value] = variant is not None
            if variant is not None:
                variants.append(variant)
        matrix.append(row)

    diverse = Corpus(variants, name=f"{corpus.name}-diverse", version=corpus.version)
    logger.info(f"Generated {len(variants)} variants from {len(bases)} base records")
    return diverse, matrix


def applicability_matrix(
    corpus: Corpus, transforms: Optional[Sequence[str]] = None
) -> List[Dict[str, object]]:
    """记录 × 变换 的可应用性矩阵"""
    return generate_variants(corpus, transforms)[1]


def score_variants(
    parents: Corpus, diverse: Corpus, scorer: LanguageModelScorer
) -> List[ScoredVariant]:
    """计算每个变体相对父程序的自然度"""
    scored = []
    for variant in diverse.records:
        parent = parents.get(variant.origin.parent_id)
        if parent is None:
            logger.warning(f"Variant {variant.id} has no parent in corpus, skipped")
            continue
        score = naturalness(parent.bare_source, variant.bare_source, scorer)
        scored.append(ScoredVariant(variant, TransformId(variant.origin.transform_id), score.value))
    return scored


def select_natural(
    scored: List[ScoredVariant],
    keep_ratio: float = TRANSFORM_CONFIG["keep_ratio"],
    min_variants: int = TRANSFORM_CONFIG["min_variants"],
) -> List[ScoredVariant]:
    """
    Diverse-N 选择规则

    全局按 (自然度, 变换顺序, 父 id) 排序保留前 ceil(n * keep_ratio) 个,
    再去掉保留变体少于 min_variants 个的父程序。

    Returns:
        与输入同序的列表, kept 标记是否进入 Diverse-N
    """
    if not 0 < keep_ratio <= 1:
        raise ValueError("keep_ratio must be in (0, 1]")
    ranked = sorted(
        range(len(scored)),
        key=lambda i: (scored[i].score, scored[i].transform.order, scored[i].record.parent_id),
    )
    cut = set(ranked[: math.ceil(len(scored) * keep_ratio)])

    survivors: Dict[str, int] = {}
    for i in cut:
        parent = scored[i].record.parent_id
        survivors[parent] = survivors.get(parent, 0) + 1

    selected = []
    for i, item in enumerate(scored):
        kept = i in cut and survivors[item.record.parent_id] >= min_variants
        selected.append(ScoredVariant(item.record, item.transform, item.score, kept))
    return selected


@timing_decorator
def build_diverse(
    corpus: Corpus,
    scorer: Optional[LanguageModelScorer] = None,
    transforms: Optional[Sequence[str]] = None,
    keep_ratio: float = TRANSFORM_CONFIG["keep_ratio"],
    min_variants: int = TRANSFORM_CONFIG["min_variants"],
    context: Optional[TransformContext] = None,
) -> Tuple[Corpus, Corpus]:
    """
    构建 Diverse 与 Diverse-N 变体语料

    Args:
        corpus: 基础语料
        scorer: 自然度模型, 默认在语料裸源码上训练三元模型

    Returns:
        (diverse, diverse_n)
    """
    diverse, _ = generate_variants(corpus, transforms, context)
    scorer = scorer or NgramScorer().train(r.bare_source for r in corpus.records)
    selected = select_natural(score_variants(corpus, diverse, scorer), keep_ratio, min_variants)
    return diverse, natural_corpus(diverse, selected)


def natural_corpus(diverse: Corpus, selected: List[ScoredVariant]) -> Corpus:
    kept = [s.record for s in selected if s.kept]
    logger.info(f"Diverse-N keeps {len(kept)} of {len(diverse)} variants")
    return Corpus(kept, name=diverse.name.replace("-diverse", "-diverse-n"), version=diverse.version)


def _csv_text(fieldnames: List[str], rows: List[Dict[str, object]]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


def export_applicability(matrix: List[Dict[str, object]], path: str) -> None:
    """可应用性矩阵 CSV: record_id + 每种变换一列 (0/1)"""
    names = [t.value for t in TransformId if not matrix or t.value in matrix[0]]
    rows = [
        {"record_id": row["record_id"], **{n: int(bool(row[n])) for n in names}}
        for row in matrix
    ]
    SafeFileHandler.atomic_write(path, _csv_text(["record_id"] + names, rows))


def export_naturalness(selected: List[ScoredVariant], path: str) -> None:
    """自然度台账 CSV: record_id, parent_id, transform, score, kept"""
    rows = [
        {
            "record_id": s.record.id,
            "parent_id": s.record.parent_id,
            "transform": s.transform.value,
            "score": f"{s.score:.6f}",
            "kept": int(s.kept),
        }
        for s in selected
    ]
    SafeFileHandler.atomic_write(
        path, _csv_text(["record_id", "parent_id", "transform", "score", "kept"], rows)
    )

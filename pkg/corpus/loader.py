"""
语料加载、校验与保存

清单格式 (manifest.json, UTF-8):
    [{"id", "source_path", "intent", "class"?, "origin"?}, ...]
或带元数据的对象形式:
    {"name", "version", "counts", "records": [...]}
"""

import os
import logging
from typing import Any, Collection, Dict, List, Optional, Tuple

from core.config import CORPUS_CONFIG
from core.exceptions import CorpusError, DuplicateId, MissingManifest, ParseFailure
from core.utils import SafeFileHandler, read_source, timing_decorator
from astcore.annotations import count_spec_comments
from astcore.syntax import parse
from .classifier import classify_control_flow
from .models import Corpus, Origin, ProgramRecord, Violation

logger = logging.getLogger(__name__)


def validate_record(
    record: ProgramRecord, known_ids: Collection[str] = ()
) -> List[Violation]:
    """
    校验单条记录的不变量

    Args:
        record: 要校验的记录
        known_ids: 语料中已知的记录 id (用于检查变换记录的父记录)

    Returns:
        违规列表, 为空表示记录合法
    """
    from transforms.base import TransformId

    violations: List[Violation] = []
    try:
        parse(record.bare_source)
    except ParseFailure as e:
        violations.append(Violation("ParseError", record.id, e.message))

    if count_spec_comments(record.bare_source) > 0:
        violations.append(
            Violation("AnnotationPresent", record.id, "bare source contains //@ or /*@ comments")
        )

    if not record.origin.is_base:
        if record.origin.parent_id not in known_ids:
            violations.append(
                Violation("DanglingParent", record.id, str(record.origin.parent_id))
            )
        if record.origin.transform_id not in TransformId.values():
            violations.append(
                Violation("UnknownTransform", record.id, str(record.origin.transform_id))
            )
    return violations


def _manifest_entries(manifest: Any) -> Tuple[List[Dict[str, Any]], Dict[str, Any]]:
    if isinstance(manifest, list):
        return manifest, {}
    if isinstance(manifest, dict) and isinstance(manifest.get("records"), list):
        return manifest["records"], manifest
    raise MissingManifest("manifest must be a list of records or an object with 'records'")


@timing_decorator
def load_corpus(path: str, strict: Optional[bool] = None) -> Corpus:
    """
    加载并校验语料

    Args:
        path: 语料目录 (包含 manifest.json 和源文件)
        strict: 严格模式下任一记录校验失败即报错; 宽松模式跳过该记录

    Returns:
        Corpus

    Raises:
        MissingManifest: 清单缺失或格式错误
        DuplicateId: 记录 id 重复
        ParseFailure: 严格模式下记录源码无法解析
    """
    strict = CORPUS_CONFIG["strict"] if strict is None else strict
    manifest_path = os.path.join(path, CORPUS_CONFIG["manifest_file"])
    if not os.path.isfile(manifest_path):
        raise MissingManifest(f"no manifest at {manifest_path}", path=path)

    manifest = SafeFileHandler.read_json(manifest_path)
    if manifest is None:
        raise MissingManifest(f"unreadable manifest at {manifest_path}", path=path)
    entries, meta = _manifest_entries(manifest)

    records: List[ProgramRecord] = []
    seen = set()
    for entry in entries:
        record_id = str(entry["id"])
        if record_id in seen:
            raise DuplicateId(record_id)
        seen.add(record_id)

        source_path = os.path.join(path, entry["source_path"])
        if not os.path.isfile(source_path):
            raise CorpusError(f"missing source file for {record_id}: {source_path}", record_id=record_id)
        source = read_source(source_path)

        try:
            cfc = classify_control_flow(source)
        except ParseFailure as e:
            if strict:
                raise e.with_record(record_id)
            logger.warning(f"Skipping unparseable record {record_id}: {e.message}")
            continue

        declared = entry.get("class")
        if declared and declared != cfc.value:
            logger.warning(
                f"Record {record_id}: manifest class {declared} differs from computed {cfc.value}"
            )

        records.append(
            ProgramRecord(
                id=record_id,
                bare_source=source,
                intent=entry.get("intent", ""),
                cfc=cfc,
                origin=Origin.parse(entry.get("origin", "base")),
            )
        )

    known = {r.id for r in records}
    parents = {r.id for r in records if r.origin.is_base} | set(meta.get("parents", []))
    valid: List[ProgramRecord] = []
    for record in records:
        violations = validate_record(record, parents if parents else known)
        if not violations:
            valid.append(record)
            continue
        summary = ", ".join(f"{v.kind}({v.detail})" for v in violations)
        if strict:
            raise CorpusError(f"record {record.id} invalid: {summary}", record_id=record.id)
        logger.warning(f"Skipping invalid record {record.id}: {summary}")

    corpus = Corpus(
        valid,
        name=meta.get("name", os.path.basename(os.path.normpath(path))),
        version=str(meta.get("version", "1")),
    )

    declared_counts = meta.get("counts")
    if declared_counts and declared_counts != corpus.class_counts():
        logger.warning(
            f"Manifest counts {declared_counts} differ from recomputed {corpus.class_counts()}"
        )
    logger.info(f"Loaded corpus {corpus.name}: {len(corpus)} records {corpus.class_counts()}")
    return corpus


def save_corpus(corpus: Corpus, path: str, parents: Collection[str] = ()) -> None:
    """
    保存语料 (源文件 + 带元数据的清单), 可被 load_corpus 原样读回

    Args:
        corpus: 要保存的语料
        path: 目标目录
        parents: 变体语料引用的父记录 id (写入清单以便独立加载)
    """
    sources_dir = CORPUS_CONFIG["sources_dir"]
    rows = []
    for record in corpus.records:
        rel = f"{sources_dir}/{record.id}.java"
        SafeFileHandler.atomic_write(os.path.join(path, rel), record.bare_source)
        rows.append(
            {
                "id": record.id,
                "source_path": rel,
                "intent": record.intent,
                "class": record.cfc.value,
                "origin": str(record.origin),
            }
        )
    manifest = dict(corpus.manifest_meta)
    manifest["records"] = rows
    if parents:
        manifest["parents"] = sorted(set(parents))
    SafeFileHandler.write_json(os.path.join(path, CORPUS_CONFIG["manifest_file"]), manifest)
    logger.info(f"Saved corpus {corpus.name} ({len(corpus)} records) to {path}")

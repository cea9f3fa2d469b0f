"""
变异体生成、等价抑制与完备性输入构造
"""

import csv
import io
import os
import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

from core.exceptions import AnchorMissing
from core.utils import SafeFileHandler, timing_decorator
from astcore.annotations import (
    AnnotationIndex,
    SpecifiedProgram,
    embed_annotations,
    reanchor,
    same_code,
    strip_annotations,
)
from astcore.syntax import Edit, apply_edits, node_by_ordinal, parse, parses
from .equivalence import canonical_source
from .models import Mutant, MutantSet, MutationOperator
from .operators import finder_for

logger = logging.getLogger(__name__)


def generate_mutants(
    bare_source: str,
    operators: Optional[Sequence] = None,
    parent_id: str = "",
) -> MutantSet:
    """
    对父程序的每个 (位置, 替换) 生成一个变异体

    Args:
        bare_source: 不含注解的父程序
        operators: 算子 (或其名字) 列表, 空表示全部
        parent_id: 父记录 id

    Returns:
        MutantSet, 变异体按算子顺序、文档顺序排列且源码互不相同

    Raises:
        ParseFailure: 父程序无法解析
    """
    tree = parse(bare_source)
    seen = {bare_source}
    mutants: List[Mutant] = []
    for kind in MutationOperator.resolve(operators):
        for start, end, replacement in finder_for(kind)(tree):
            data, _ = apply_edits(tree.data, [Edit(start, end, replacement)])
            source = data.decode("utf-8")
            if source in seen:
                continue
            if not parses(source):
                logger.debug(f"Dropping unparseable {kind.value} mutant at {start}-{end}")
                continue
            seen.add(source)
            mutants.append(
                Mutant(
                    id=f"{parent_id or 'program'}__m{len(mutants) + 1:03d}",
                    source=source,
                    parent_id=parent_id,
                    operator=kind,
                    site=(start, end),
                    replacement=replacement,
                )
            )
    logger.debug(f"Generated {len(mutants)} mutants for {parent_id or 'program'}")
    return MutantSet(parent_id, bare_source, mutants)


def suppress_equivalents(mutant_set: MutantSet) -> MutantSet:
    """
    抑制语法上可以断定等价的变异体

    规范串与父程序相同, 或与之前保留的变异体相同的变异体被移入 suppressed
    """
    parent_form = canonical_source(mutant_set.parent_source)
    kept: List[Mutant] = []
    suppressed: List[Mutant] = list(mutant_set.suppressed)
    forms = {parent_form}
    for mutant in mutant_set.mutants:
        form = canonical_source(mutant.source)
        if form in forms:
            suppressed.append(replace(mutant, suppressed=True))
            continue
        forms.add(form)
        kept.append(mutant)
    if len(kept) != len(mutant_set.mutants):
        logger.info(
            f"Suppressed {len(mutant_set.mutants) - len(kept)} equivalent mutants "
            f"for {mutant_set.parent_id or 'program'}"
        )
    return MutantSet(mutant_set.parent_id, mutant_set.parent_source, kept, suppressed)


@dataclass
class CompletenessPairs:
    """(变异体, 嵌入同一规格的变异程序) 对; skipped 记录无法嵌入的变异体及原因"""

    pairs: List[Tuple[Mutant, SpecifiedProgram]] = field(default_factory=list)
    skipped: List[Tuple[str, str]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[Tuple[Mutant, SpecifiedProgram]]:
        return iter(self.pairs)


def _embed_into_mutant(parent_tree, index: AnnotationIndex, mutant: Mutant) -> SpecifiedProgram:
    start, end = mutant.site
    for entry in index.entries:
        node = node_by_ordinal(parent_tree.root, entry.anchor.node_type, entry.anchor.ordinal)
        if node is None:
            raise AnchorMissing(f"anchor {entry.anchor.node_type}#{entry.anchor.ordinal} not found")
        if not entry.anchor.orphan and mutant.replacement == "" and start <= node.start_byte < end:
            raise AnchorMissing(
                f"{mutant.operator.value} removed annotated {node.type}",
                node_type=node.type,
                ordinal=entry.anchor.ordinal,
            )
    data, positions = apply_edits(parent_tree.data, [Edit(start, end, mutant.replacement)])
    moved = reanchor(parent_tree, index, data.decode("utf-8"), positions)
    return embed_annotations(mutant.source, moved, mutant.parent_id)


def completeness_inputs(spec: SpecifiedProgram, mutants: MutantSet) -> CompletenessPairs:
    """
    把规格的注解原样嵌入每个变异体

    Args:
        spec: 父程序上的规格
        mutants: 父程序的变异体 (不含被抑制的)

    Returns:
        CompletenessPairs; 删除了注解锚点的变异体被跳过并记录

    Raises:
        ValueError: 规格剥离注解后与父程序代码不一致
    """
    bare, index = strip_annotations(spec)
    if not same_code(bare, mutants.parent_source):
        raise ValueError(f"specification does not strip to the parent source of {mutants.parent_id}")
    parent_tree = parse(mutants.parent_source)
    result = CompletenessPairs()
    for mutant in mutants.mutants:
        try:
            result.pairs.append((mutant, _embed_into_mutant(parent_tree, index, mutant)))
        except AnchorMissing as e:
            logger.warning(f"Skipping completeness pair {mutant.id}: {e.message}")
            result.skipped.append((mutant.id, e.message))
    return result


def _sequence(mutant: Mutant) -> int:
    return int(mutant.id.rsplit("__m", 1)[1])


@timing_decorator
def export_mutants(
    sets: Iterable[MutantSet], directory: str, ledger: Optional[str] = None
) -> int:
    """
    导出变异体: <parent>/<mutant_id>.java 加 CSV 台账 (含被抑制的)

    Args:
        sets: 各父程序的变异体集合
        directory: 源文件目录
        ledger: 台账路径, 默认为 <directory>/mutants.csv

    Returns:
        写出的变异体源文件数
    """
    fieldnames = ["parent_id", "mutant_id", "operator", "site_start", "site_end", "suppressed"]
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    written = 0
    for mutant_set in sets:
        folder = os.path.join(directory, mutant_set.parent_id or "program")
        for mutant in sorted(mutant_set.mutants + mutant_set.suppressed, key=_sequence):
            SafeFileHandler.atomic_write(os.path.join(folder, f"{mutant.id}.java"), mutant.source)
            writer.writerow(mutant.to_row())
            written += 1
    SafeFileHandler.atomic_write(ledger or os.path.join(directory, "mutants.csv"), buffer.getvalue())
    logger.info(f"Exported {written} mutants to {directory}")
    return written


def load_mutants(directory: str, ledger: str, parents) -> List[MutantSet]:
    """从导出目录读回变异体 (parents: 父记录 id -> 父程序源码)"""
    sets = {pid: MutantSet(pid, source) for pid, source in parents.items()}
    with open(ledger, "r", encoding="utf-8", newline="") as f:
        for row in csv.DictReader(f):
            parent_id = row["parent_id"]
            if parent_id not in sets:
                continue
            path = os.path.join(directory, parent_id or "program", f"{row['mutant_id']}.java")
            with open(path, "r", encoding="utf-8") as src:
                source = src.read()
            start, end = int(row["site_start"]), int(row["site_end"])
            parent_data = sets[parent_id].parent_source.encode("utf-8")
            prefix_len = start
            suffix_len = len(parent_data) - end
            data = source.encode("utf-8")
            replacement = data[prefix_len : len(data) - suffix_len].decode("utf-8")
            mutant = Mutant(
                id=row["mutant_id"],
                source=source,
                parent_id=parent_id,
                operator=MutationOperator(row["operator"]),
                site=(start, end),
                replacement=replacement,
                suppressed=row["suppressed"] == "1",
            )
            target = sets[parent_id].suppressed if mutant.suppressed else sets[parent_id].mutants
            target.append(mutant)
    return list(sets.values())

"""
规格注解层

JML 注解写在以 //@ 或 /*@ 开头的注释里, 附着在其后的语句或声明上。
本模块负责注解的剥离、回填、子句切分, 以及变换后的重新锚定。
"""

import re
import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

from tree_sitter import Node

from core.exceptions import AnchorMissing
from .syntax import (
    COMMENT_TYPES,
    Edit,
    PositionMap,
    SyntaxTree,
    apply_edits,
    iter_nodes,
    node_by_ordinal,
    node_ordinal,
    normalize_whitespace,
    parse,
)

logger = logging.getLogger(__name__)

LINE_MARKER = "//@"
BLOCK_MARKER = "/*@"

# 子句关键字及其规范名
CLAUSE_KEYWORDS = {
    "requires": "requires",
    "pre": "requires",
    "ensures": "ensures",
    "post": "ensures",
    "maintaining": "maintaining",
    "loop_invariant": "maintaining",
    "decreasing": "decreasing",
    "decreases": "decreasing",
    "loop_variant": "decreasing",
    "assert": "assert",
    "assume": "assume",
    "assignable": "assignable",
    "modifies": "assignable",
    "signals": "signals",
    "signals_only": "signals",
    "invariant": "invariant",
}
_KEYWORD_RE = re.compile(r"(?<![\w\\])(" + "|".join(sorted(CLAUSE_KEYWORDS, key=len, reverse=True)) + r")\b")
_AT_PREFIX_RE = re.compile(r"^\s*@+", re.MULTILINE)

# 可以作为注解锚点的语句/声明所在的容器
STATEMENT_PARENTS = frozenset(
    {
        "program",
        "block",
        "class_body",
        "constructor_body",
        "switch_block_statement_group",
        "interface_body",
        "enum_body_declarations",
    }
)


class CommentKind(str, Enum):
    LINE = "LineComment"
    BLOCK = "BlockComment"


@dataclass(frozen=True)
class Clause:
    """一个子句; start/end 是在注释原文中的偏移 (end 包含分号)"""

    kind: str
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class Anchor:
    """
    注解锚点: 裸源码中同类型节点的文档序号

    orphan 为 True 时注解后面没有语句, 锚定到所在容器的右花括号之前
    """

    node_type: str
    ordinal: int
    orphan: bool = False


@dataclass(frozen=True)
class AnnotationEntry:
    span: Tuple[int, int]
    kind: CommentKind
    text: str
    clauses: Tuple[Clause, ...]
    anchor: Anchor
    indent: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "span": list(self.span),
            "kind": self.kind.value,
            "text": self.text,
            "clauses": [c.text for c in self.clauses],
            "anchor": {
                "node_type": self.anchor.node_type,
                "ordinal": self.anchor.ordinal,
                "orphan": self.anchor.orphan,
            },
            "indent": self.indent,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AnnotationEntry":
        return make_entry(
            data["text"],
            Anchor(**data["anchor"]),
            tuple(data.get("span", (0, 0))),
            data.get("indent", ""),
        )


@dataclass(frozen=True)
class AnnotationIndex:
    entries: Tuple[AnnotationEntry, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[AnnotationEntry]:
        return iter(self.entries)

    @property
    def clause_count(self) -> int:
        return sum(len(e.clauses) for e in self.entries)

    @property
    def clause_kinds(self) -> List[str]:
        kinds: List[str] = []
        for entry in self.entries:
            for clause in entry.clauses:
                if clause.kind not in kinds:
                    kinds.append(clause.kind)
        return kinds

    def to_dict(self) -> Dict[str, Any]:
        return {"entries": [e.to_dict() for e in self.entries]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AnnotationIndex":
        return cls(tuple(AnnotationEntry.from_dict(e) for e in data.get("entries", [])))


@dataclass(frozen=True)
class SpecifiedProgram:
    """嵌入了 JML 注解的程序"""

    source: str
    annotations: AnnotationIndex
    base_id: str = ""


def is_spec_comment(text: str) -> bool:
    return text.startswith(LINE_MARKER) or text.startswith(BLOCK_MARKER)


def _comment_body(text: str) -> Tuple[int, int]:
    if text.startswith(LINE_MARKER):
        return len(LINE_MARKER), len(text)
    end = len(text) - 2 if text.endswith("*/") else len(text)
    return len(BLOCK_MARKER), end


def _clause_kind(normalized: str) -> str:
    match = _KEYWORD_RE.search(normalized)
    return CLAUSE_KEYWORDS[match.group(1)] if match else "other"


def split_clauses(text: str) -> Tuple[Clause, ...]:
    """
    按顶层分号切分注释中的子句 (量词括号内的分号不切分)

    Args:
        text: 完整注释文本, 含 //@ 或 /*@ ... */ 标记

    Returns:
        子句元组
    """
    body_start, body_end = _comment_body(text)
    clauses: List[Clause] = []
    depth = 0
    chunk_start = body_start
    for i in range(body_start, body_end + 1):
        ch = text[i] if i < body_end else ";"
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth = max(0, depth - 1)
        elif ch == ";" and (depth == 0 or i == body_end):
            raw = text[chunk_start:i]
            normalized = " ".join(_AT_PREFIX_RE.sub(" ", raw).split()).rstrip("@").strip()
            if normalized:
                offset = len(raw) - len(raw.lstrip(" \t\n@"))
                end = i + 1 if i < body_end else body_end
                clauses.append(
                    Clause(_clause_kind(normalized), normalized, chunk_start + offset, end)
                )
            chunk_start = i + 1
            depth = 0
    return tuple(clauses)


def make_entry(
    text: str, anchor: Anchor, span: Tuple[int, int] = (0, 0), indent: str = ""
) -> AnnotationEntry:
    kind = CommentKind.LINE if text.startswith(LINE_MARKER) else CommentKind.BLOCK
    return AnnotationEntry(tuple(span), kind, text, split_clauses(text), anchor, indent)


def spec_comments(tree: SyntaxTree) -> List[Node]:
    return [
        n
        for n in iter_nodes(tree.root)
        if n.type in COMMENT_TYPES and is_spec_comment(tree.text(n))
    ]


def count_spec_comments(source: str) -> int:
    """统计源码中的规格注释数 (无法解析时退化为文本扫描)"""
    tree = parse(source, strict=False)
    found = len(spec_comments(tree))
    if found == 0 and tree.root.has_error:
        return len(re.findall(r"//@|/\*@", source))
    return found


def _anchor_for(tree: SyntaxTree, comment: Node) -> Anchor:
    sibling = comment.next_named_sibling
    while sibling is not None and sibling.type in COMMENT_TYPES:
        sibling = sibling.next_named_sibling
    if sibling is not None:
        return Anchor(sibling.type, node_ordinal(tree.root, sibling))
    parent = comment.parent
    logger.warning(f"Orphaned annotation at byte {comment.start_byte}, anchored to enclosing {parent.type}")
    return Anchor(parent.type, node_ordinal(tree.root, parent), orphan=True)


def _removal_span(tree: SyntaxTree, node: Node) -> Tuple[int, int]:
    """整行只有注释时删除整行, 否则只删除注释及其前导空白"""
    data = tree.data
    line_start = tree.line_start(node.start_byte)
    before = data[line_start : node.start_byte]
    newline = data.find(b"\n", node.end_byte)
    line_end = len(data) if newline == -1 else newline
    after = data[node.end_byte : line_end]
    if not before.strip() and not after.strip():
        return line_start, min(len(data), line_end + 1)
    start = node.start_byte
    while start > line_start and data[start - 1 : start] in (b" ", b"\t"):
        start -= 1
    return start, node.end_byte


def strip_annotations(
    program: Union[SpecifiedProgram, str]
) -> Tuple[str, AnnotationIndex]:
    """
    剥离全部规格注释

    Args:
        program: 带注解的程序 (或其源码)

    Returns:
        (裸源码, 注解索引)

    Raises:
        ParseFailure: 源码无法解析
    """
    source = program.source if isinstance(program, SpecifiedProgram) else program
    tree = parse(source)
    entries = []
    edits = []
    for node in spec_comments(tree):
        text = tree.text(node)
        entries.append(
            make_entry(
                text,
                _anchor_for(tree, node),
                (node.start_byte, node.end_byte),
                tree.indent_of(node),
            )
        )
        start, end = _removal_span(tree, node)
        edits.append(Edit(start, end, ""))
    if not edits:
        return source, AnnotationIndex()
    bare, _ = apply_edits(tree.data, edits)
    return bare.decode("utf-8"), AnnotationIndex(tuple(entries))


def _anchor_position(tree: SyntaxTree, anchor: Anchor) -> Tuple[int, str, bool]:
    """锚点插入位置、缩进、是否位于行首"""
    node = node_by_ordinal(tree.root, anchor.node_type, anchor.ordinal)
    if node is None:
        raise AnchorMissing(
            f"anchor {anchor.node_type}#{anchor.ordinal} not found",
            node_type=anchor.node_type,
            ordinal=anchor.ordinal,
        )
    if anchor.orphan:
        closing = node.children[-1] if node.children else node
        indent = tree.indent_of(closing) + "    "
        return tree.line_start(closing.start_byte), indent, True
    line_start = tree.line_start(node.start_byte)
    at_line_start = not tree.data[line_start : node.start_byte].strip()
    indent = tree.indent_of(node)
    return (line_start if at_line_start else node.start_byte), indent, at_line_start


def embed_annotations(
    bare: str, index: AnnotationIndex, base_id: str = ""
) -> SpecifiedProgram:
    """
    把注解索引回填到裸源码

    Raises:
        AnchorMissing: 索引引用的锚点在裸源码中不存在
        ParseFailure: 裸源码无法解析
    """
    if not index.entries:
        return SpecifiedProgram(bare, AnnotationIndex(), base_id)
    tree = parse(bare)
    edits = []
    for entry in index.entries:
        pos, indent, at_line_start = _anchor_position(tree, entry.anchor)
        if at_line_start:
            text = f"{indent}{entry.text}\n"
        else:
            text = f"{entry.text}\n{indent}"
        edits.append(Edit(pos, pos, text))
    data, _ = apply_edits(tree.data, edits)
    source = data.decode("utf-8")
    _, new_index = strip_annotations(source)
    return SpecifiedProgram(source, new_index, base_id)


def _statement_at(tree: SyntaxTree, pos: int) -> Optional[Node]:
    fallback = None
    for node in iter_nodes(tree.root):
        if not node.is_named or node.parent is None:
            continue
        if node.parent.type not in STATEMENT_PARENTS or node.type in COMMENT_TYPES:
            continue
        if node.start_byte == pos:
            return node
        if fallback is None and node.start_byte > pos:
            fallback = node
    return fallback


def reanchor(
    old_bare: SyntaxTree, index: AnnotationIndex, new_bare: str, positions: PositionMap
) -> AnnotationIndex:
    """
    变换后重新计算锚点

    Args:
        old_bare: 变换前的裸源码语法树
        index: 变换前的注解索引
        new_bare: 变换后的裸源码
        positions: 变换编辑产生的位置映射

    Returns:
        锚定到新源码节点的注解索引
    """
    new_tree = parse(new_bare)
    entries = []
    for entry in index.entries:
        node = node_by_ordinal(old_bare.root, entry.anchor.node_type, entry.anchor.ordinal)
        if node is None:
            raise AnchorMissing(f"anchor {entry.anchor.node_type}#{entry.anchor.ordinal} not found")
        if entry.anchor.orphan:
            closing = node.children[-1]
            new_pos = positions.map(closing.start_byte)
            target = None
            if new_pos is not None:
                for candidate in iter_nodes(new_tree.root):
                    if candidate.children and candidate.children[-1].start_byte == new_pos:
                        target = candidate
                        break
            if target is None:
                raise AnchorMissing("orphaned annotation container lost by rewrite")
            anchor = Anchor(target.type, node_ordinal(new_tree.root, target), orphan=True)
        else:
            new_pos = positions.map(node.start_byte)
            if new_pos is None:
                logger.warning(
                    f"Anchor {entry.anchor.node_type}#{entry.anchor.ordinal} rewritten away, "
                    "attaching to nearest following statement"
                )
                new_pos = _nearest_mapped(positions, node.start_byte)
            target = _statement_at(new_tree, new_pos)
            if target is None:
                raise AnchorMissing(f"no statement after byte {new_pos}")
            anchor = Anchor(target.type, node_ordinal(new_tree.root, target))
        entries.append(replace(entry, anchor=anchor))
    return AnnotationIndex(tuple(entries))


def _nearest_mapped(positions: PositionMap, pos: int) -> int:
    before = pos
    while before > 0:
        before -= 1
        mapped = positions.map(before)
        if mapped is not None:
            return mapped + 1
    return 0


def without_clause(index: AnnotationIndex, entry_no: int, clause_no: int) -> AnnotationIndex:
    """删除一个子句; 注释只剩这一个子句时删除整条注释"""
    entries = list(index.entries)
    entry = entries[entry_no]
    if len(entry.clauses) <= 1:
        del entries[entry_no]
        return AnnotationIndex(tuple(entries))
    clause = entry.clauses[clause_no]
    text = entry.text[: clause.start] + entry.text[clause.end :]
    entries[entry_no] = make_entry(text, entry.anchor, entry.span, entry.indent)
    return AnnotationIndex(tuple(entries))


def with_clause_edit(
    index: AnnotationIndex, entry_no: int, start: int, end: int, replacement: str
) -> AnnotationIndex:
    """替换注释原文中的 [start, end) 片段"""
    entries = list(index.entries)
    entry = entries[entry_no]
    text = entry.text[:start] + replacement + entry.text[end:]
    entries[entry_no] = make_entry(text, entry.anchor, entry.span, entry.indent)
    return AnnotationIndex(tuple(entries))


def strip_all_comments(source: str) -> str:
    """去掉所有注释 (用于比较两份源码的代码主体)"""
    tree = parse(source, strict=False)
    edits = []
    for node in iter_nodes(tree.root):
        if node.type in COMMENT_TYPES:
            start, end = _removal_span(tree, node)
            edits.append(Edit(start, end, ""))
    if not edits:
        return source
    # 同一行的多个注释可能产生嵌套的删除区间, 只保留最外层
    edits.sort(key=lambda e: (e.start, -e.end))
    merged: List[Edit] = []
    for edit in edits:
        if merged and edit.start < merged[-1].end:
            continue
        merged.append(edit)
    data, _ = apply_edits(tree.data, merged)
    return data.decode("utf-8")


def same_code(left: str, right: str) -> bool:
    """忽略注释和空白差异后两份源码是否一致"""
    return normalize_whitespace(strip_all_comments(left)) == normalize_whitespace(
        strip_all_comments(right)
    )

"""
astcore - Java 语法树与 JML 注解层

- syntax: tree-sitter 解析门面, 字节区间编辑, 规则驱动的子树改写
- annotations: 规格注释的剥离/回填/子句切分/重新锚定
"""

from .syntax import (
    SyntaxTree,
    Edit,
    PositionMap,
    TextBuilder,
    Rewriter,
    parse,
    parses,
    render,
    apply_edits,
    iter_nodes,
    find_all,
    normalize_whitespace,
    LOOP_TYPES,
    BRANCH_TYPES,
    EXIT_TYPES,
)
from .annotations import (
    Anchor,
    AnnotationEntry,
    AnnotationIndex,
    Clause,
    CommentKind,
    SpecifiedProgram,
    strip_annotations,
    embed_annotations,
    reanchor,
    count_spec_comments,
    split_clauses,
    same_code,
)

__all__ = [
    "SyntaxTree",
    "Edit",
    "PositionMap",
    "TextBuilder",
    "Rewriter",
    "parse",
    "parses",
    "render",
    "apply_edits",
    "iter_nodes",
    "find_all",
    "normalize_whitespace",
    "LOOP_TYPES",
    "BRANCH_TYPES",
    "EXIT_TYPES",
    "Anchor",
    "AnnotationEntry",
    "AnnotationIndex",
    "Clause",
    "CommentKind",
    "SpecifiedProgram",
    "strip_annotations",
    "embed_annotations",
    "reanchor",
    "count_spec_comments",
    "split_clauses",
    "same_code",
]

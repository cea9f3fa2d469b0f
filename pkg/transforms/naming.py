"""
变量重命名变换

VariableRenaming1 把每个局部变量/参数改成它的首字母, VariableRenaming2
通过名字提供者替换为同义名。两者都按方法独立处理, 冲突时追加序号 (a, a2, a3 ...)。
"""

import logging
from typing import Dict, List, Optional, Set

from tree_sitter import Node

from astcore.syntax import Rewriter, SyntaxTree, iter_nodes, node_key
from .base import (
    JAVA_KEYWORDS,
    NameProvider,
    TransformContext,
    TransformId,
    declarations,
    method_nodes,
    register,
)

logger = logging.getLogger(__name__)

# 默认同义词表 (VariableRenaming2)
DEFAULT_SYNONYMS: Dict[str, str] = {
    "res": "result",
    "result": "res",
    "ret": "output",
    "sum": "total",
    "total": "sum",
    "count": "counter",
    "cnt": "counter",
    "i": "idx",
    "j": "jdx",
    "k": "kdx",
    "n": "num",
    "num": "value",
    "val": "value",
    "value": "val",
    "arr": "array",
    "array": "arr",
    "nums": "values",
    "str": "text",
    "s": "text",
    "temp": "tmp",
    "tmp": "temp",
    "len": "length",
    "length": "size",
    "size": "length",
    "max": "maximum",
    "min": "minimum",
    "a": "first",
    "b": "second",
    "x": "xValue",
    "y": "yValue",
    "left": "lo",
    "right": "hi",
    "lo": "low",
    "hi": "high",
    "start": "begin",
    "end": "finish",
    "flag": "found",
    "index": "pos",
    "pos": "index",
    "list": "items",
    "map": "table",
}


class SynonymNameProvider:
    """基于同义词表的名字提供者; 表中没有的名字加上 new 前缀"""

    def __init__(self, table: Optional[Dict[str, str]] = None):
        self.table = dict(DEFAULT_SYNONYMS if table is None else table)

    def __call__(self, name: str) -> str:
        if name in self.table:
            return self.table[name]
        return "new" + name[:1].upper() + name[1:]


def first_character(name: str) -> str:
    for ch in name:
        if ch not in "_$":
            return ch
    return name


# 这些位置上的 identifier 不是变量引用
_NON_VARIABLE_FIELDS = {
    "field_access": "field",
    "method_invocation": "name",
    "method_declaration": "name",
    "constructor_declaration": "name",
    "class_declaration": "name",
}
_LABEL_PARENTS = frozenset({"labeled_statement", "break_statement", "continue_statement"})


def _is_variable_reference(node: Node) -> bool:
    parent = node.parent
    if parent is None:
        return False
    if parent.type in _LABEL_PARENTS or parent.type == "scoped_identifier":
        return False
    field_name = _NON_VARIABLE_FIELDS.get(parent.type)
    if field_name is not None:
        target = parent.child_by_field_name(field_name)
        if target is not None and node_key(target) == node_key(node):
            return False
    return True


def _field_names(root: Node) -> Set[str]:
    names: Set[str] = set()
    for node in iter_nodes(root):
        if node.type in ("field_declaration", "constant_declaration"):
            for declarator in node.children_by_field_name("declarator"):
                name = declarator.child_by_field_name("name")
                if name is not None:
                    names.add(name.text.decode("utf-8"))
    return names


def plan_renames(method: Node, provider: NameProvider, fields: Set[str]) -> Dict[str, str]:
    """
    计算一个方法内的改名映射

    Args:
        method: 方法或构造器节点
        provider: 旧名 -> 候选新名
        fields: 类字段名 (与字段同名的局部变量保持不变)

    Returns:
        {旧名: 新名}, 只包含真正改变的名字
    """
    declared: List[str] = []
    for name, _, _ in declarations(method):
        if name not in declared:
            declared.append(name)
    reserved = {
        n.text.decode("utf-8") for n in iter_nodes(method) if n.type == "identifier"
    } - set(declared)
    reserved |= JAVA_KEYWORDS | fields

    taken: Set[str] = set()
    pending: List[str] = []
    for name in declared:
        if name in fields or provider(name) == name:
            taken.add(name)
        else:
            pending.append(name)

    mapping: Dict[str, str] = {}
    for name in pending:
        base = provider(name) or name
        candidate = base
        suffix = 2
        while candidate in taken or candidate in reserved:
            candidate = f"{base}{suffix}"
            suffix += 1
        taken.add(candidate)
        if candidate != name:
            mapping[name] = candidate
    return mapping


def _renaming_rewriter(tree: SyntaxTree, provider: NameProvider) -> Rewriter:
    fields = _field_names(tree.root)
    targets: Dict[tuple, str] = {}
    renamed = 0
    for method in method_nodes(tree.root):
        mapping = plan_renames(method, provider, fields)
        renamed += len(mapping)
        for node in iter_nodes(method):
            if node.type != "identifier" or not _is_variable_reference(node):
                continue
            new_name = mapping.get(node.text.decode("utf-8"))
            if new_name is not None:
                targets[node_key(node)] = new_name

    def build(node: Node, builder) -> int:
        builder.write(targets[node_key(node)])
        return 0

    rewriter = Rewriter(tree, lambda n: node_key(n) in targets, build)
    # 站点数按改名的变量计, 而不是按出现次数
    rewriter.sites = renamed
    return rewriter


@register(TransformId.VARIABLE_RENAMING_1)
def variable_renaming_1(tree: SyntaxTree, context: TransformContext) -> Rewriter:
    return _renaming_rewriter(tree, first_character)


@register(TransformId.VARIABLE_RENAMING_2)
def variable_renaming_2(tree: SyntaxTree, context: TransformContext) -> Rewriter:
    return _renaming_rewriter(tree, context.name_provider or SynonymNameProvider())

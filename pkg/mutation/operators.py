"""
变异算子

每个算子枚举父程序中的 (起始字节, 结束字节, 替换文本) 三元组, 按文档顺序
"""

from typing import Callable, Dict, Iterator, Tuple

from tree_sitter import Node

from astcore.syntax import (
    ARITHMETIC_OPS,
    COMMENT_TYPES,
    RELATIONAL_OPS,
    SyntaxTree,
    iter_nodes,
    operator_of,
)
from transforms.base import BLOCK_LIKE, declared_types, enclosing_method, inner_expression
from .models import MutationOperator

Site = Tuple[int, int, str]
SiteFinder = Callable[[SyntaxTree], Iterator[Site]]

INT_MIN, INT_MAX = -(2**31), 2**31 - 1
LONG_MIN, LONG_MAX = -(2**63), 2**63 - 1

_FINDERS: Dict[MutationOperator, SiteFinder] = {}


def operator(kind: MutationOperator) -> Callable[[SiteFinder], SiteFinder]:
    def decorator(finder: SiteFinder) -> SiteFinder:
        _FINDERS[kind] = finder
        return finder

    return decorator


def finder_for(kind: MutationOperator) -> SiteFinder:
    return _FINDERS[kind]


def _operator_token(node: Node) -> Node:
    return node.child_by_field_name("operator")


def _binary_with(tree: SyntaxTree, ops) -> Iterator[Node]:
    for node in iter_nodes(tree.root):
        if node.type == "binary_expression" and operator_of(node) in ops:
            yield node


@operator(MutationOperator.RELATIONAL_OP_REPLACE)
def relational_sites(tree: SyntaxTree) -> Iterator[Site]:
    for node in _binary_with(tree, RELATIONAL_OPS):
        token = _operator_token(node)
        for replacement in RELATIONAL_OPS:
            if replacement != token.type:
                yield token.start_byte, token.end_byte, replacement


def _stringy(node: Node, tree: SyntaxTree) -> bool:
    """操作数可能是字符串 (字符串字面量或声明为 String 的变量)"""
    method = enclosing_method(node)
    types = declared_types(method) if method is not None else {}
    for child in iter_nodes(node):
        if child.type == "string_literal":
            return True
        if child.type == "identifier" and types.get(tree.text(child)) == "String":
            return True
    return False


@operator(MutationOperator.ARITHMETIC_OP_REPLACE)
def arithmetic_sites(tree: SyntaxTree) -> Iterator[Site]:
    for node in _binary_with(tree, ARITHMETIC_OPS):
        if operator_of(node) == "+" and _stringy(node, tree):
            continue
        token = _operator_token(node)
        for replacement in ARITHMETIC_OPS:
            if replacement != token.type:
                yield token.start_byte, token.end_byte, replacement


@operator(MutationOperator.LOGICAL_CONNECTOR_REPLACE)
def logical_sites(tree: SyntaxTree) -> Iterator[Site]:
    for node in _binary_with(tree, ("&&", "||")):
        token = _operator_token(node)
        yield token.start_byte, token.end_byte, "||" if token.type == "&&" else "&&"


_CONDITIONAL = frozenset(
    {"if_statement", "while_statement", "do_statement", "for_statement", "ternary_expression"}
)


@operator(MutationOperator.UNARY_INSERT)
def unary_insert_sites(tree: SyntaxTree) -> Iterator[Site]:
    for node in iter_nodes(tree.root):
        if node.type not in _CONDITIONAL:
            continue
        condition = node.child_by_field_name("condition")
        if condition is None:
            continue
        if condition.type == "parenthesized_expression" and node.type != "ternary_expression":
            condition = inner_expression(condition)
            if condition is None:
                continue
        yield condition.start_byte, condition.end_byte, f"!({tree.text(condition)})"


def _integer_value(text: str) -> Tuple[int, str]:
    suffix = text[-1] if text[-1] in "lL" else ""
    digits = (text[:-1] if suffix else text).replace("_", "")
    return int(digits), suffix


def _inside(node: Node, kind: str) -> bool:
    current = node.parent
    while current is not None:
        if current.type == kind:
            return True
        current = current.parent
    return False


@operator(MutationOperator.LITERAL_REPLACE)
def literal_sites(tree: SyntaxTree) -> Iterator[Site]:
    for node in iter_nodes(tree.root):
        if node.type in ("true", "false"):
            yield node.start_byte, node.end_byte, "false" if node.type == "true" else "true"
            continue
        if node.type != "decimal_integer_literal" or _inside(node, "switch_label"):
            continue
        value, suffix = _integer_value(tree.text(node))
        low, high = (LONG_MIN, LONG_MAX) if suffix else (INT_MIN, INT_MAX)
        negated = node.parent is not None and node.parent.type == "unary_expression"
        seen = {value}
        for candidate in (value + 1, value - 1, 0):
            if candidate in seen or not low <= candidate <= high:
                continue
            seen.add(candidate)
            text = f"{candidate}{suffix}"
            if candidate < 0 and negated:
                text = f"({text})"
            yield node.start_byte, node.end_byte, text


# 删除后容易让方法缺少返回或不可编译的语句
_KEEP_STATEMENTS = frozenset(
    {
        "local_variable_declaration",
        "return_statement",
        "throw_statement",
        "yield_statement",
        "explicit_constructor_invocation",
        "class_declaration",
    }
)


def _deletion_span(tree: SyntaxTree, node: Node) -> Tuple[int, int]:
    """整行只有该语句时删除整行"""
    data = tree.data
    line_start = tree.line_start(node.start_byte)
    newline = data.find(b"\n", node.end_byte)
    line_end = len(data) if newline == -1 else newline
    if not data[line_start : node.start_byte].strip() and not data[node.end_byte : line_end].strip():
        return line_start, min(len(data), line_end + 1)
    return node.start_byte, node.end_byte


@operator(MutationOperator.STATEMENT_DELETE)
def statement_delete_sites(tree: SyntaxTree) -> Iterator[Site]:
    for node in iter_nodes(tree.root):
        if not node.is_named or node.parent is None or node.parent.type not in BLOCK_LIKE:
            continue
        if node.type in COMMENT_TYPES or node.type in _KEEP_STATEMENTS or node.type == "switch_label":
            continue
        if any(n.type in ("return_statement", "throw_statement") for n in iter_nodes(node)):
            continue
        start, end = _deletion_span(tree, node)
        yield start, end, ""

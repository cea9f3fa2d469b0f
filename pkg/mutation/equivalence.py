"""
等价变异体的语法判定

把程序规范化为前缀形式的字符串后比较, 规范化规则:
- x*1, x/1, x+0, x-0, 1*x, 0+x 化简为 x
- 交换律运算符 (+ * == != && || & | ^) 的纯操作数按规范串排序 (含字符串字面量的 + 除外)
- a > b 写成 b < a, a >= b 写成 b <= a
- 去掉括号和注释
"""

from tree_sitter import Node

from astcore.syntax import COMMENT_TYPES, INTEGER_LITERAL_TYPES, SyntaxTree, operator_of, parse
from transforms.base import contains_type, inner_expression, is_pure

COMMUTATIVE = frozenset({"+", "*", "==", "!=", "&&", "||", "&", "|", "^"})
ORIENTED = {">": "<", ">=": "<="}


def _literal_value(text: str):
    try:
        value = int(text.rstrip("lL").replace("_", ""), 0)
    except ValueError:
        return None
    return value


def _is_literal(node: Node, tree: SyntaxTree, value: int) -> bool:
    return node.type in INTEGER_LITERAL_TYPES and _literal_value(tree.text(node)) == value


def _binary(node: Node, tree: SyntaxTree) -> str:
    op = operator_of(node)
    left = node.child_by_field_name("left")
    right = node.child_by_field_name("right")
    if op in ("*", "/") and _is_literal(right, tree, 1):
        return canonical(left, tree)
    if op in ("+", "-") and _is_literal(right, tree, 0):
        return canonical(left, tree)
    if op == "*" and _is_literal(left, tree, 1):
        return canonical(right, tree)
    if op == "+" and _is_literal(left, tree, 0):
        return canonical(right, tree)

    left_form, right_form = canonical(left, tree), canonical(right, tree)
    if op in ORIENTED:
        return f"({ORIENTED[op]} {right_form} {left_form})"
    if (
        op in COMMUTATIVE
        and is_pure(node)
        and not contains_type(node, {"string_literal"})
        and right_form < left_form
    ):
        left_form, right_form = right_form, left_form
    return f"({op} {left_form} {right_form})"


def canonical(node: Node, tree: SyntaxTree) -> str:
    """节点的规范串"""
    if node.type == "parenthesized_expression":
        inner = inner_expression(node)
        return canonical(inner, tree) if inner is not None else "()"
    if node.type == "binary_expression":
        return _binary(node, tree)
    if node.type in INTEGER_LITERAL_TYPES:
        value = _literal_value(tree.text(node))
        return str(value) if value is not None else tree.text(node)
    if node.child_count == 0:
        return tree.text(node)
    parts = [canonical(c, tree) for c in node.children if c.type not in COMMENT_TYPES]
    return f"[{node.type} {' '.join(parts)}]"


def canonical_source(source: str) -> str:
    """整个程序的规范串; 无法解析时返回原文"""
    tree = parse(source, strict=False)
    if tree.root.has_error:
        return source
    return canonical(tree.root, tree)

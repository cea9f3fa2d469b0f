"""
表达式级变换: 关系/相等运算交换操作数, 自增和复合赋值展开, equals 接收者交换
"""

from tree_sitter import Node

from astcore.syntax import Rewriter, SyntaxTree, TextBuilder, node_key, operator_of
from .base import (
    TransformContext,
    TransformId,
    declared_types,
    enclosing_method,
    is_pure,
    precedence,
    register,
)

FLIPPED_RELATION = {"<": ">", ">": "<", "<=": ">=", ">=": "<="}
# 复合赋值带隐式窄化转换, 展开后对这些类型无法编译
_NARROW_TYPES = frozenset({"byte", "short", "char"})


def _is_statement_expression(node: Node) -> bool:
    """表达式语句, 或 for 循环的更新部分"""
    parent = node.parent
    if parent is None:
        return False
    if parent.type == "expression_statement":
        return True
    if parent.type == "for_statement":
        return any(node_key(u) == node_key(node) for u in parent.children_by_field_name("update"))
    return False


def _narrow_target(target: Node) -> bool:
    if target.type != "identifier":
        return False
    method = enclosing_method(target)
    if method is None:
        return False
    return declared_types(method).get(target.text.decode("utf-8"), "") in _NARROW_TYPES


def _operand(update: Node) -> Node:
    return update.named_children[0]


def _pure_operands(node: Node) -> bool:
    # 交换操作数会改变求值顺序
    return is_pure(node.child_by_field_name("left")) and is_pure(node.child_by_field_name("right"))


@register(TransformId.SWITCH_RELATION)
def switch_relation(tree: SyntaxTree, context: TransformContext) -> Rewriter:
    """a < b  ->  b > a"""

    def match(node: Node) -> bool:
        return (
            node.type == "binary_expression"
            and operator_of(node) in FLIPPED_RELATION
            and _pure_operands(node)
        )

    def build(node: Node, builder: TextBuilder) -> None:
        left = node.child_by_field_name("left")
        right = node.child_by_field_name("right")
        rewriter.emit(right, builder)
        builder.write(f" {FLIPPED_RELATION[operator_of(node)]} ")
        if precedence(left) <= 9:
            builder.write("(")
            rewriter.emit(left, builder)
            builder.write(")")
        else:
            rewriter.emit(left, builder)

    rewriter = Rewriter(tree, match, build)
    return rewriter


@register(TransformId.SWITCH_EQUAL_EXP)
def switch_equal_exp(tree: SyntaxTree, context: TransformContext) -> Rewriter:
    """a == b  ->  b == a"""

    def match(node: Node) -> bool:
        return node.type == "binary_expression" and operator_of(node) in ("==", "!=") and _pure_operands(node)

    def build(node: Node, builder: TextBuilder) -> None:
        left = node.child_by_field_name("left")
        right = node.child_by_field_name("right")
        rewriter.emit(right, builder)
        builder.write(f" {operator_of(node)} ")
        if precedence(left) <= 8:
            builder.write("(")
            rewriter.emit(left, builder)
            builder.write(")")
        else:
            rewriter.emit(left, builder)

    rewriter = Rewriter(tree, match, build)
    return rewriter


@register(TransformId.UNARY_2_ADD)
def unary_2_add(tree: SyntaxTree, context: TransformContext) -> Rewriter:
    """i++ / ++i / i-- / --i 作为语句时改写为 i = i + 1"""

    def match(node: Node) -> bool:
        if node.type != "update_expression" or not _is_statement_expression(node):
            return False
        target = _operand(node)
        return is_pure(target) and not _narrow_target(target)

    def build(node: Node, builder: TextBuilder) -> None:
        target = tree.text(_operand(node))
        op = "+" if operator_of(node) == "++" else "-"
        builder.write(f"{target} = {target} {op} 1")

    return Rewriter(tree, match, build)


@register(TransformId.ADD_2_EQUAL)
def add_2_equal(tree: SyntaxTree, context: TransformContext) -> Rewriter:
    """a += b  ->  a = a + b"""

    def match(node: Node) -> bool:
        if node.type != "assignment_expression" or operator_of(node) not in ("+=", "-="):
            return False
        if not _is_statement_expression(node):
            return False
        target = node.child_by_field_name("left")
        return is_pure(target) and not _narrow_target(target)

    def build(node: Node, builder: TextBuilder) -> None:
        left = node.child_by_field_name("left")
        right = node.child_by_field_name("right")
        target = tree.text(left)
        builder.copy(left.start_byte, left.end_byte)
        builder.write(f" = {target} {operator_of(node)[0]} ")
        if precedence(right) <= 11:
            builder.write("(")
            rewriter.emit(right, builder)
            builder.write(")")
        else:
            rewriter.emit(right, builder)

    rewriter = Rewriter(tree, match, build)
    return rewriter


_SAFE_ARGUMENTS = frozenset(
    {
        "identifier",
        "field_access",
        "method_invocation",
        "array_access",
        "string_literal",
        "this",
        "parenthesized_expression",
    }
)


@register(TransformId.SWITCH_STRING_EQUAL)
def switch_string_equal(tree: SyntaxTree, context: TransformContext) -> Rewriter:
    """a.equals(b)  ->  b.equals(a)"""

    def match(node: Node) -> bool:
        if node.type != "method_invocation":
            return False
        name = node.child_by_field_name("name")
        receiver = node.child_by_field_name("object")
        args = node.child_by_field_name("arguments")
        if name is None or receiver is None or args is None:
            return False
        if tree.text(name) != "equals" or receiver.type == "super":
            return False
        if node.child_by_field_name("type_arguments") is not None:
            return False
        values = [a for a in args.named_children if a.type not in ("line_comment", "block_comment")]
        return len(values) == 1 and values[0].type in _SAFE_ARGUMENTS

    def build(node: Node, builder: TextBuilder) -> None:
        receiver = node.child_by_field_name("object")
        args = node.child_by_field_name("arguments")
        argument = [a for a in args.named_children if a.type in _SAFE_ARGUMENTS][0]
        rewriter.emit(argument, builder)
        builder.write(".equals(")
        rewriter.emit(receiver, builder)
        builder.write(")")

    rewriter = Rewriter(tree, match, build)
    return rewriter

"""
语义保持变换的公共部分: 变换编号、结果类型、注册表与 apply 入口
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Set, Tuple

from tree_sitter import Node

from core.exceptions import ParseFailure, RewriteConflict
from astcore.annotations import embed_annotations, reanchor, strip_annotations
from astcore.syntax import (
    COMMENT_TYPES,
    LOOP_TYPES,
    SCOPE_BOUNDARY_TYPES,
    Rewriter,
    SyntaxTree,
    apply_edits,
    iter_nodes,
    parse,
)

logger = logging.getLogger(__name__)


class TransformId(str, Enum):
    """18 种变换; 枚举顺序即平局时的排序顺序"""

    VARIABLE_RENAMING_1 = "VariableRenaming1"
    VARIABLE_RENAMING_2 = "VariableRenaming2"
    SWITCH_RELATION = "SwitchRelation"
    UNARY_2_ADD = "Unary2Add"
    ADD_2_EQUAL = "Add2Equal"
    MERGE_VAR_DECL = "MergeVarDecl"
    INFIX_DIVIDING = "InfixDividing"
    SWITCH_EQUAL_EXP = "SwitchEqualExp"
    SWITCH_STRING_EQUAL = "SwitchStringEqual"
    FOR_2_WHILE = "For2While"
    WHILE_2_FOR = "While2For"
    ELSE_IF_2_IF = "ElseIf2If"
    SWITCH_2_IF = "Switch2If"
    SWAP_STATEMENT = "SwapStatement"
    REVERSE_IF = "ReverseIf"
    IF_2_COND_EXP = "If2CondExp"
    COND_EXP_2_IF = "CondExp2If"
    DIVIDING_COMPOSED_IF = "DividingComposedIf"

    @classmethod
    def values(cls) -> List[str]:
        return [t.value for t in cls]

    @property
    def order(self) -> int:
        return list(TransformId).index(self)


@dataclass(frozen=True)
class TransformResult:
    variant_source: str
    transform: TransformId
    sites_rewritten: int
    applicable: bool


NameProvider = Callable[[str], str]


@dataclass
class TransformContext:
    """变换运行时选项"""

    name_provider: Optional[NameProvider] = None


RuleFactory = Callable[[SyntaxTree, TransformContext], Rewriter]

_REGISTRY: Dict[TransformId, RuleFactory] = {}


def register(transform: TransformId) -> Callable[[RuleFactory], RuleFactory]:
    """注册变换规则工厂"""

    def decorator(factory: RuleFactory) -> RuleFactory:
        _REGISTRY[transform] = factory
        return factory

    return decorator


def registered() -> Dict[TransformId, RuleFactory]:
    # 规则模块在导入时完成注册
    from . import expressions, naming, statements  # noqa: F401

    return _REGISTRY


def apply(
    transform, source: str, context: Optional[TransformContext] = None
) -> TransformResult:
    """
    对程序应用一种变换, 一次改写全部可改写位置

    Args:
        transform: TransformId 或其名字
        source: 源码 (可以带注解, 注解原样保留并重新锚定)
        context: 变换选项

    Returns:
        TransformResult

    Raises:
        ParseFailure: 输入无法解析
        RewriteConflict: 改写位置重叠或改写结果无法解析
    """
    transform = TransformId(transform)
    context = context or TransformContext()
    bare, index = strip_annotations(source)
    tree = parse(bare)

    rewriter = registered()[transform](tree, context)
    edits = rewriter.edits()
    if not edits or rewriter.sites == 0:
        return TransformResult(source, transform, 0, False)

    data, positions = apply_edits(tree.data, edits)
    new_bare = data.decode("utf-8")
    if new_bare == bare:
        return TransformResult(source, transform, 0, False)

    try:
        parse(new_bare)
    except ParseFailure as e:
        raise RewriteConflict(
            f"{transform.value} produced unparseable output: {e.message}",
            transform=transform.value,
        )

    variant = new_bare
    if index.entries:
        variant = embed_annotations(new_bare, reanchor(tree, index, new_bare, positions)).source
    return TransformResult(variant, transform, rewriter.sites, True)


def applicable_transforms(source: str, context: Optional[TransformContext] = None) -> Set[TransformId]:
    """对全部 18 种变换试应用, 返回可应用的集合"""
    return {t for t in TransformId if apply(t, source, context).applicable}


# ---- 规则共用的语法辅助 ----

BLOCK_LIKE = frozenset({"block", "constructor_body", "switch_block_statement_group"})
SIDE_EFFECT_TYPES = frozenset(
    {"assignment_expression", "update_expression", "method_invocation", "object_creation_expression"}
)
MUTATING_TYPES = frozenset({"assignment_expression", "update_expression"})
NUMERIC_RANK = {"byte": 0, "short": 0, "char": 0, "int": 0, "long": 1, "float": 2, "double": 3}
RANK_TYPE = {0: "int", 1: "long", 2: "float", 3: "double"}
JAVA_KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue default do
    double else enum extends final finally float for goto if implements import instanceof int
    interface long native new package private protected public return short static strictfp
    super switch synchronized this throw throws transient try void volatile while true false
    null var record yield _""".split()
)

_BINARY_PREC = {
    "||": 3, "&&": 4, "|": 5, "^": 6, "&": 7, "==": 8, "!=": 8,
    "<": 9, ">": 9, "<=": 9, ">=": 9, "<<": 10, ">>": 10, ">>>": 10,
    "+": 11, "-": 11, "*": 12, "/": 12, "%": 12,
}


def precedence(node: Node) -> int:
    """表达式优先级, 数值越大结合越紧"""
    kind = node.type
    if kind in ("assignment_expression", "lambda_expression"):
        return 1
    if kind == "ternary_expression":
        return 2
    if kind == "binary_expression":
        op = node.child_by_field_name("operator")
        return _BINARY_PREC.get(op.type if op is not None else "", 3)
    if kind == "instanceof_expression":
        return 9
    if kind in ("unary_expression", "cast_expression"):
        return 13
    if kind == "update_expression":
        return 14
    return 15


def parenthesize(text: str, node: Node, minimum: int) -> str:
    return f"({text})" if precedence(node) < minimum else text


def same(a: Optional[Node], b: Optional[Node]) -> bool:
    if a is None or b is None:
        return False
    return (a.start_byte, a.end_byte, a.type) == (b.start_byte, b.end_byte, b.type)


def contains_type(node: Node, types) -> bool:
    return any(n.type in types for n in iter_nodes(node))


def is_pure(node: Node) -> bool:
    """不含赋值、自增自减、方法调用和对象创建"""
    return not contains_type(node, SIDE_EFFECT_TYPES)


def inner_expression(paren: Node) -> Optional[Node]:
    """括号表达式中的表达式"""
    for child in paren.named_children:
        if child.type not in COMMENT_TYPES:
            return child
    return None


def statements_of(node: Node) -> List[Node]:
    """块或 switch 分组中的语句 (不含注释和标签)"""
    return [
        c
        for c in node.named_children
        if c.type not in COMMENT_TYPES and c.type != "switch_label"
    ]


def enclosing_method(node: Node) -> Optional[Node]:
    current = node.parent
    while current is not None:
        if current.type in ("method_declaration", "constructor_declaration"):
            return current
        current = current.parent
    return None


def method_nodes(root: Node) -> List[Node]:
    return [
        n for n in iter_nodes(root) if n.type in ("method_declaration", "constructor_declaration")
    ]


def declarations(method: Node) -> List[Tuple[str, Node, str]]:
    """
    方法中声明的参数和局部变量

    Returns:
        [(名字, 名字节点, 类型文本)], 按出现顺序
    """
    found: List[Tuple[str, Node, str]] = []
    for node in iter_nodes(method):
        if node.type in ("formal_parameter", "catch_formal_parameter", "enhanced_for_statement"):
            name = node.child_by_field_name("name")
            type_node = node.child_by_field_name("type")
            if name is None:
                continue
            type_text = type_node.text.decode("utf-8") if type_node is not None else ""
            if node.type == "catch_formal_parameter":
                type_text = "Throwable"
            found.append((name.text.decode("utf-8"), name, type_text))
        elif node.type == "spread_parameter":
            for child in node.named_children:
                if child.type == "variable_declarator":
                    name = child.child_by_field_name("name")
                    if name is not None:
                        found.append((name.text.decode("utf-8"), name, "[]"))
        elif node.type == "local_variable_declaration":
            type_node = node.child_by_field_name("type")
            type_text = type_node.text.decode("utf-8") if type_node is not None else ""
            for declarator in node.children_by_field_name("declarator"):
                name = declarator.child_by_field_name("name")
                if name is None:
                    continue
                dims = declarator.child_by_field_name("dimensions")
                suffix = dims.text.decode("utf-8") if dims is not None else ""
                found.append((name.text.decode("utf-8"), name, type_text + suffix))
    return found


def declared_types(method: Node) -> Dict[str, str]:
    types: Dict[str, str] = {}
    for name, _, type_text in declarations(method):
        types.setdefault(name, type_text.replace(" ", ""))
    return types


def numeric_type(expr: Node, types: Dict[str, str]) -> Optional[str]:
    """推断算术表达式的数值类型 (无法确定时返回 None)"""
    kind = expr.type
    text = expr.text.decode("utf-8")
    if kind == "identifier":
        declared = types.get(text, "")
        return declared if declared in NUMERIC_RANK else None
    if kind == "decimal_integer_literal" or kind in ("hex_integer_literal", "octal_integer_literal", "binary_integer_literal"):
        return "long" if text[-1] in "lL" else "int"
    if kind == "decimal_floating_point_literal":
        return "float" if text[-1] in "fF" else "double"
    if kind == "character_literal":
        return "char"
    if kind == "array_access":
        array = expr.child_by_field_name("array")
        if array is not None and array.type == "identifier":
            declared = types.get(array.text.decode("utf-8"), "")
            if declared.endswith("[]"):
                element = declared[:-2]
                return element if element in NUMERIC_RANK else None
        return None
    if kind == "parenthesized_expression":
        inner = inner_expression(expr)
        return numeric_type(inner, types) if inner is not None else None
    if kind == "unary_expression":
        operand = expr.child_by_field_name("operand")
        if operand is None or (expr.child_by_field_name("operator").type == "!"):
            return None
        result = numeric_type(operand, types)
        return RANK_TYPE[NUMERIC_RANK[result]] if result else None
    if kind == "cast_expression":
        type_node = expr.child_by_field_name("type")
        cast = type_node.text.decode("utf-8") if type_node is not None else ""
        return cast if cast in NUMERIC_RANK else None
    if kind == "binary_expression":
        op = expr.child_by_field_name("operator").type
        if op not in ("+", "-", "*", "/", "%"):
            return None
        left = numeric_type(expr.child_by_field_name("left"), types)
        right = numeric_type(expr.child_by_field_name("right"), types)
        if left is None or right is None:
            return None
        return RANK_TYPE[max(NUMERIC_RANK[left], NUMERIC_RANK[right])]
    return None


def has_own_continue(loop: Node) -> bool:
    """循环体中是否有作用于本循环的 continue (带标签的一律视为有)"""
    body = loop.child_by_field_name("body")
    if body is None:
        return False

    def walk(node: Node, nested: bool) -> bool:
        for child in node.children:
            if child.type == "continue_statement":
                labelled = any(c.type == "identifier" for c in child.named_children)
                if labelled or not nested:
                    return True
            if child.type in SCOPE_BOUNDARY_TYPES:
                continue
            if walk(child, nested or child.type in LOOP_TYPES):
                return True
        return False

    if body.type == "continue_statement":
        return True
    return walk(body, False)


def referenced_after(stmt: Node, name: str) -> bool:
    """同一块中 stmt 之后的语句是否引用了 name"""
    sibling = stmt.next_named_sibling
    while sibling is not None:
        for node in iter_nodes(sibling):
            if node.type == "identifier" and node.text.decode("utf-8") == name:
                return True
        sibling = sibling.next_named_sibling
    return False

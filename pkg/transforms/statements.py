"""
语句级变换: 循环互换、条件结构改写、声明合并与拆分、语句交换

块级规则 (MergeVarDecl, InfixDividing, While2For, SwapStatement) 以整个块为改写点,
一次处理块内全部站点; 其余规则以语句本身为改写点。
"""

import logging
from typing import Callable, Dict, List, Optional, Set, Tuple

from tree_sitter import Node

from astcore.syntax import (
    COMMENT_TYPES,
    LOOP_TYPES,
    SCOPE_BOUNDARY_TYPES,
    Rewriter,
    SyntaxTree,
    TextBuilder,
    identifiers,
    iter_nodes,
    node_key,
    operator_of,
)
from .base import (
    BLOCK_LIKE,
    MUTATING_TYPES,
    NUMERIC_RANK,
    TransformContext,
    TransformId,
    contains_type,
    declarations,
    declared_types,
    enclosing_method,
    has_own_continue,
    inner_expression,
    is_pure,
    numeric_type,
    precedence,
    referenced_after,
    register,
    same,
)

logger = logging.getLogger(__name__)

INDENT = "    "
ARITHMETIC = ("+", "-", "*", "/", "%")

Writer = Callable[[TextBuilder], None]
Plan = List[Tuple[Node, Node, Writer]]


def rewrite_block(rewriter: Rewriter, block: Node, builder: TextBuilder, plan: Plan) -> int:
    """
    按计划改写块: plan 中每一项用 writer 的输出替换 [first.start, last.end)

    其余文本原样复制, 其中嵌套的改写点照常改写。返回改写的站点数。
    """
    cursor = block.start_byte
    for first, last, writer in plan:
        rewriter.copy(cursor, first.start_byte, builder, block)
        writer(builder)
        cursor = last.end_byte
    rewriter.copy(cursor, block.end_byte, builder, block)
    return len(plan)


def block_rule(tree: SyntaxTree, planner: Callable[[Node], Plan]) -> Rewriter:
    """以块为改写点的规则: planner 对块给出改写计划, 空计划表示块不是改写点"""
    plans: Dict[tuple, Plan] = {}

    def plan_for(node: Node) -> Plan:
        key = node_key(node)
        if key not in plans:
            plans[key] = planner(node) if node.type in BLOCK_LIKE else []
        return plans[key]

    def match(node: Node) -> bool:
        return node.type in BLOCK_LIKE and bool(plan_for(node))

    def build(node: Node, builder: TextBuilder) -> int:
        return rewrite_block(rewriter, node, builder, plan_for(node))

    rewriter = Rewriter(tree, match, build)
    return rewriter


def children_of(block: Node) -> List[Node]:
    """块的具名子节点 (含注释, 不含 switch 标签)"""
    return [c for c in block.named_children if c.type != "switch_label"]


def statements_of(block: Node) -> List[Node]:
    return [c for c in children_of(block) if c.type not in COMMENT_TYPES]


def is_block_member(node: Node) -> bool:
    return node.parent is not None and node.parent.type in BLOCK_LIKE


JUMP_TYPES = frozenset(
    {"return_statement", "break_statement", "continue_statement", "throw_statement", "yield_statement"}
)


def _always_true(condition: Optional[Node]) -> bool:
    return condition is None or condition.type == "true"


def _labelled_break(node: Node) -> bool:
    return any(
        n.type == "break_statement" and any(c.type == "identifier" for c in n.named_children)
        for n in iter_nodes(node)
    )


def _switch_completes(node: Node) -> bool:
    body = node.child_by_field_name("body")
    if body is None:
        return True
    groups = [c for c in body.named_children if c.type in ("switch_block_statement_group", "switch_rule")]
    labels = [
        label for group in groups for label in group.named_children if label.type == "switch_label"
    ]
    if not any(label.text.decode("utf-8").startswith("default") for label in labels):
        return True
    if _switch_breaks(body) or _labelled_break(body):
        return True
    if groups and groups[0].type == "switch_rule":
        for rule in groups:
            arm = statements_of(rule)
            if not arm or arm[-1].type not in ("block", "throw_statement"):
                return True
            if can_complete_normally(arm[-1]):
                return True
        return False
    if not groups:
        return True
    last = statements_of(groups[-1])
    return not last or can_complete_normally(last[-1])


def can_complete_normally(statement: Optional[Node]) -> bool:
    """
    语句能否正常执行完毕 (保守近似, 拿不准时视为能)

    循环体末尾追加语句前要确认它可达, 否则编译器报 unreachable statement。
    """
    if statement is None:
        return True
    kind = statement.type
    if kind in JUMP_TYPES:
        return False
    if kind in BLOCK_LIKE:
        members = statements_of(statement)
        return not members or can_complete_normally(members[-1])
    if kind == "if_statement":
        alternative = statement.child_by_field_name("alternative")
        if alternative is None:
            return True
        return can_complete_normally(statement.child_by_field_name("consequence")) or can_complete_normally(
            alternative
        )
    if kind in ("while_statement", "for_statement", "do_statement"):
        if not _always_true(condition_of(statement)):
            return True
        body = statement.child_by_field_name("body")
        return body is not None and (_switch_breaks(body) or _labelled_break(body) or body.type == "break_statement")
    if kind in ("try_statement", "try_with_resources_statement"):
        finally_clause = next((c for c in statement.named_children if c.type == "finally_clause"), None)
        if finally_clause is not None:
            block = next((c for c in finally_clause.named_children if c.type == "block"), None)
            if not can_complete_normally(block):
                return False
        if can_complete_normally(statement.child_by_field_name("body")):
            return True
        return any(
            can_complete_normally(c.child_by_field_name("body"))
            for c in statement.named_children
            if c.type == "catch_clause"
        )
    if kind == "synchronized_statement":
        return can_complete_normally(statement.child_by_field_name("body"))
    if kind == "switch_expression":
        return _switch_completes(statement)
    return True


def condition_of(node: Node) -> Optional[Node]:
    """if/while 条件括号中的表达式"""
    condition = node.child_by_field_name("condition")
    if condition is None:
        return None
    if condition.type == "parenthesized_expression":
        return inner_expression(condition)
    return condition


def keyword_gap(tree: SyntaxTree, node: Node) -> str:
    """语句关键字与左括号之间的原始空白"""
    keyword = node.children[0]
    paren = node.children[1]
    return tree.slice(keyword.end_byte, paren.start_byte)


def header_gap(tree: SyntaxTree, node: Node) -> str:
    """右括号与循环体之间的原始空白"""
    body = node.child_by_field_name("body")
    close = body.prev_sibling
    return tree.slice(close.end_byte, body.start_byte)


def write_braced(
    rewriter: Rewriter, statement: Node, builder: TextBuilder, indent: str
) -> None:
    """输出语句; 不是块时加上花括号"""
    if statement.type == "block":
        rewriter.emit(statement, builder)
        return
    builder.write("{\n" + indent + INDENT)
    rewriter.emit(statement, builder)
    builder.write("\n" + indent + "}")


def fresh_name(prefix: str, taken: Set[str]) -> str:
    index = 1
    while f"{prefix}{index}" in taken:
        index += 1
    name = f"{prefix}{index}"
    taken.add(name)
    return name


# ---- For2While ----

@register(TransformId.FOR_2_WHILE)
def for_2_while(tree: SyntaxTree, context: TransformContext) -> Rewriter:
    """for (init; cond; upd) body  ->  init; while (cond) { body; upd; }"""

    def hoisted_names(node: Node) -> List[str]:
        init = node.child_by_field_name("init")
        if init is None or init.type != "local_variable_declaration":
            return []
        names = []
        for declarator in init.children_by_field_name("declarator"):
            name = declarator.child_by_field_name("name")
            if name is not None:
                names.append(tree.text(name))
        return names

    def match(node: Node) -> bool:
        if node.type != "for_statement" or not is_block_member(node):
            return False
        if has_own_continue(node):
            return False
        # 更新语句接在循环体末尾, 必须可达
        if node.children_by_field_name("update") and not can_complete_normally(node.child_by_field_name("body")):
            return False
        method = enclosing_method(node)
        declared = [name for name, _, _ in declarations(method)] if method is not None else []
        for name in hoisted_names(node):
            if declared.count(name) > 1 or referenced_after(node, name):
                return False
        return True

    def build(node: Node, builder: TextBuilder) -> None:
        indent = tree.indent_of(node)
        inits = node.children_by_field_name("init")
        condition = node.child_by_field_name("condition")
        updates = node.children_by_field_name("update")
        body = node.child_by_field_name("body")

        for init in inits:
            rewriter.copy(init.start_byte, init.end_byte, builder, node)
            if init.type != "local_variable_declaration":
                builder.write(";")
            builder.write("\n" + indent)
        builder.mark(node.start_byte)
        builder.write("while" + keyword_gap(tree, node) + "(")
        if condition is None:
            builder.write("true")
        else:
            rewriter.copy(condition.start_byte, condition.end_byte, builder, node)
        builder.write(")" + header_gap(tree, node))

        update_text = [tree.text(u) + ";" for u in updates]
        if not update_text:
            rewriter.emit(body, builder)
            return
        if body.type != "block":
            inner = indent + INDENT
            builder.write("{\n" + inner)
            rewriter.emit(body, builder)
            for text in update_text:
                builder.write("\n" + inner + text)
            builder.write("\n" + indent + "}")
            return

        members = children_of(body)
        if not members:
            builder.write("{")
            for text in update_text:
                builder.write("\n" + indent + INDENT + text)
            builder.write("\n" + indent + "}")
            return
        last = members[-1]
        rewriter.copy(body.start_byte, last.end_byte, builder, body)
        inner = tree.indent_of(last)
        for text in update_text:
            builder.write("\n" + inner + text)
        rewriter.copy(last.end_byte, body.end_byte, builder, body)

    rewriter = Rewriter(tree, match, build)
    return rewriter


# ---- While2For ----

def _updated_name(statement: Node) -> Optional[str]:
    """形如 v++ / v = ... / v += ... 的表达式语句所更新的变量名"""
    if statement.type != "expression_statement" or not statement.named_children:
        return None
    expr = statement.named_children[0]
    if expr.type == "update_expression":
        target = expr.named_children[0]
    elif expr.type == "assignment_expression":
        target = expr.child_by_field_name("left")
    else:
        return None
    return target.text.decode("utf-8") if target.type == "identifier" else None


def _single_declared_name(declaration: Node) -> Optional[str]:
    declarators = declaration.children_by_field_name("declarator")
    if len(declarators) != 1:
        return None
    if declarators[0].child_by_field_name("value") is None:
        return None
    return declarators[0].child_by_field_name("name").text.decode("utf-8")


@register(TransformId.WHILE_2_FOR)
def while_2_for(tree: SyntaxTree, context: TransformContext) -> Rewriter:
    """
    while 循环改写为 for 循环

    紧邻的前一条声明和循环体末尾对同一变量的更新折叠进 for 头部;
    只有更新时写成 for (; c; u), 都没有时写成 for (; c;)
    """

    def trailing_update(loop: Node) -> Optional[Node]:
        body = loop.child_by_field_name("body")
        if body is None or body.type != "block" or has_own_continue(loop):
            return None
        members = statements_of(body)
        if not members or _updated_name(members[-1]) is None:
            return None
        return members[-1]

    def folded_declaration(loop: Node, update: Optional[Node]) -> Optional[Node]:
        if update is None:
            return None
        previous = loop.prev_named_sibling
        while previous is not None and previous.type in COMMENT_TYPES:
            previous = previous.prev_named_sibling
        if previous is None or previous.type != "local_variable_declaration":
            return None
        name = _single_declared_name(previous)
        if name is None or name != _updated_name(update) or referenced_after(loop, name):
            return None
        return previous

    def planner(block: Node) -> Plan:
        plan: Plan = []
        claimed: Set[tuple] = set()
        for loop in statements_of(block):
            if loop.type != "while_statement" or condition_of(loop) is None:
                continue
            update = trailing_update(loop)
            condition = condition_of(loop)
            if update is not None and _updated_name(update) not in identifiers(condition):
                update = None
            declaration = folded_declaration(loop, update)
            if declaration is not None and node_key(declaration) in claimed:
                declaration = None
            first = declaration if declaration is not None else loop
            claimed.add(node_key(loop))
            plan.append((first, loop, _writer(loop, declaration, update)))
        return plan

    def _writer(loop: Node, declaration: Optional[Node], update: Optional[Node]) -> Writer:
        def write(builder: TextBuilder) -> None:
            indent = tree.indent_of(loop)
            body = loop.child_by_field_name("body")
            condition = condition_of(loop)
            if declaration is not None:
                builder.mark(declaration.start_byte)
                node = declaration.next_named_sibling
                while node is not None and node.type in COMMENT_TYPES:
                    builder.copy(node.start_byte, node.end_byte)
                    builder.write("\n" + indent)
                    node = node.next_named_sibling
            builder.mark(loop.start_byte)
            builder.write("for" + keyword_gap(tree, loop) + "(")
            if declaration is not None:
                rewriter.copy(declaration.start_byte, declaration.end_byte, builder, declaration)
                builder.write(" ")
            else:
                builder.write("; ")
            rewriter.copy(condition.start_byte, condition.end_byte, builder, loop)
            builder.write(";")
            if update is not None:
                builder.write(" " + tree.text(update.named_children[0]))
            builder.write(")" + header_gap(tree, loop))
            if update is None:
                rewriter.emit(body, builder)
                return
            previous = update.prev_named_sibling
            cut = previous.end_byte if previous is not None else body.children[0].end_byte
            rewriter.copy(body.start_byte, cut, builder, body)
            rewriter.copy(update.end_byte, body.end_byte, builder, body)

        return write

    rewriter = block_rule(tree, planner)
    return rewriter


# ---- ElseIf2If ----

def _chain_depth(node: Node) -> Tuple[Node, int]:
    """else-if 链的首个 if 与当前节点在链中的深度"""
    depth = 0
    head = node
    while head.parent is not None and head.parent.type == "if_statement":
        alternative = head.parent.child_by_field_name("alternative")
        if not same(alternative, head):
            break
        head = head.parent
        depth += 1
    return head, depth


@register(TransformId.ELSE_IF_2_IF)
def else_if_2_if(tree: SyntaxTree, context: TransformContext) -> Rewriter:
    """if (a) A else if (b) B else C  ->  if (a) A else { if (b) B else C }"""

    def match(node: Node) -> bool:
        if node.type != "if_statement":
            return False
        alternative = node.child_by_field_name("alternative")
        return alternative is not None and alternative.type == "if_statement"

    def build(node: Node, builder: TextBuilder) -> None:
        alternative = node.child_by_field_name("alternative")
        head, depth = _chain_depth(node)
        indent = tree.indent_of(head) + INDENT * depth
        rewriter.copy(node.start_byte, alternative.start_byte, builder, node)
        builder.write("{\n" + indent + INDENT)
        rewriter.emit(alternative, builder)
        builder.write("\n" + indent + "}")

    rewriter = Rewriter(tree, match, build)
    return rewriter


# ---- Switch2If ----

_PLAIN_SELECTORS = frozenset({"identifier", "field_access", "array_access"})
_LITERAL_LABELS = frozenset(
    {
        "decimal_integer_literal",
        "hex_integer_literal",
        "octal_integer_literal",
        "binary_integer_literal",
        "character_literal",
    }
)


def _label_values(label: Node) -> Optional[List[Node]]:
    """case 标签的取值; default 返回空列表, 模式匹配等不支持的标签返回 None"""
    if label.children and label.children[0].type == "default":
        return []
    values = [c for c in label.named_children if c.type not in COMMENT_TYPES]
    if not values or any(v.type in ("pattern", "guard", "type_pattern", "record_pattern") for v in values):
        return None
    return values


def _switch_breaks(node: Node) -> bool:
    """是否存在跳出本 switch 的无标签 break"""
    for child in node.children:
        if child.type == "break_statement":
            if not any(c.type == "identifier" for c in child.named_children):
                return True
        if child.type in LOOP_TYPES or child.type == "switch_expression":
            continue
        if child.type in SCOPE_BOUNDARY_TYPES:
            continue
        if _switch_breaks(child):
            return True
    return False


@register(TransformId.SWITCH_2_IF)
def switch_2_if(tree: SyntaxTree, context: TransformContext) -> Rewriter:
    """语句级 switch 改写为 if / else if / else 链"""

    def selector_type(selector: Node) -> str:
        if selector.type != "identifier":
            return ""
        method = enclosing_method(selector)
        if method is None:
            return ""
        return declared_types(method).get(tree.text(selector), "")

    def test_for(selector: Node, value: Node) -> Optional[str]:
        sel = tree.text(selector)
        kind = selector_type(selector)
        if value.type == "string_literal":
            return f"{sel}.equals({tree.text(value)})"
        if kind == "String":
            return None
        if value.type in _LITERAL_LABELS:
            return f"{sel} == {tree.text(value)}"
        if value.type in ("identifier", "field_access") and kind in NUMERIC_RANK:
            return f"{sel} == {tree.text(value)}"
        return None

    def arms(node: Node) -> Optional[List[Tuple[Optional[str], List[Node]]]]:
        """[(条件文本 或 None 表示 default, 语句列表)], 不适用时返回 None"""
        condition = node.child_by_field_name("condition")
        selector = inner_expression(condition) if condition is not None else None
        body = node.child_by_field_name("body")
        if selector is None or body is None or selector.type not in _PLAIN_SELECTORS:
            return None
        if not is_pure(selector):
            return None
        groups = [c for c in body.named_children if c.type not in COMMENT_TYPES]
        if not groups:
            return None

        result: List[Tuple[Optional[str], List[Node]]] = []
        declared_by_group: List[Set[str]] = []
        for position, group in enumerate(groups):
            labels = [c for c in group.named_children if c.type == "switch_label"]
            tests: List[str] = []
            is_default = False
            for label in labels:
                values = _label_values(label)
                if values is None:
                    return None
                if not values:
                    is_default = True
                for value in values:
                    test = test_for(selector, value)
                    if test is None:
                        return None
                    tests.append(test)
            if is_default and (tests or position != len(groups) - 1):
                return None

            if group.type == "switch_rule":
                arm_body = group.named_children[-1]
                if arm_body.type == "block":
                    statements = children_of(arm_body)
                else:
                    statements = [arm_body]
                if any(_switch_breaks(s) or s.type == "break_statement" for s in statements):
                    return None
            else:
                statements = children_of(group)
                code = [s for s in statements if s.type not in COMMENT_TYPES]
                last = code[-1] if code else None
                if last is not None and last.type == "break_statement" and not last.named_children:
                    statements = [s for s in statements if not same(s, last)]
                elif position != len(groups) - 1 and (
                    last is None
                    or last.type not in ("return_statement", "throw_statement", "continue_statement")
                ):
                    return None
                if any(s.type == "break_statement" or _switch_breaks(s) for s in statements):
                    return None
            declared_by_group.append(
                {tree.text(d.child_by_field_name("name"))
                 for s in statements if s.type == "local_variable_declaration"
                 for d in s.children_by_field_name("declarator")}
            )
            result.append((None if is_default else " || ".join(tests), statements))

        if len(result) == 1 and result[0][0] is None:
            return None
        for i, names in enumerate(declared_by_group):
            for j, (_, statements) in enumerate(result):
                if i != j and any(names & identifiers(s) for s in statements):
                    return None
        return result

    def match(node: Node) -> bool:
        return node.type == "switch_expression" and is_block_member(node) and arms(node) is not None

    def build(node: Node, builder: TextBuilder) -> None:
        indent = tree.indent_of(node)
        for position, (test, statements) in enumerate(arms(node)):
            if position > 0:
                builder.write(" else ")
            if test is not None:
                builder.write(f"if ({test}) ")
            builder.write("{")
            for statement in statements:
                builder.write("\n" + indent + INDENT)
                rewriter.emit(statement, builder)
            builder.write("\n" + indent + "}")

    rewriter = Rewriter(tree, match, build)
    return rewriter


# ---- SwapStatement ----

_SWAPPABLE = frozenset({"expression_statement", "local_variable_declaration"})
_CALL_TYPES = frozenset({"method_invocation", "object_creation_expression", "array_creation_expression"})


def _written_names(statement: Node) -> Set[str]:
    written: Set[str] = set()
    for node in iter_nodes(statement):
        if node.type == "assignment_expression":
            written |= identifiers(node.child_by_field_name("left"))
        elif node.type == "update_expression":
            written |= identifiers(node.named_children[0])
        elif node.type == "variable_declarator":
            written.add(node.child_by_field_name("name").text.decode("utf-8"))
    return written


_THROWING_OPERATORS = frozenset({"/", "%", "/=", "%="})


def may_throw(statement: Node) -> bool:
    """数组下标、整除取余和强制转换可能抛出运行时异常"""
    for node in iter_nodes(statement):
        if node.type in ("array_access", "cast_expression"):
            return True
        if node.type in ("binary_expression", "assignment_expression") and operator_of(node) in _THROWING_OPERATORS:
            return True
    return False


def independent(first: Node, second: Node) -> bool:
    """两条语句之间没有读写依赖, 且交换后异常发生时已生效的副作用不变"""
    if first.type not in _SWAPPABLE or second.type not in _SWAPPABLE:
        return False
    if contains_type(first, _CALL_TYPES) or contains_type(second, _CALL_TYPES):
        return False
    if may_throw(first) or may_throw(second):
        return False
    if not (contains_type(first, MUTATING_TYPES | {"variable_declarator"})
            and contains_type(second, MUTATING_TYPES | {"variable_declarator"})):
        return False
    return not (_written_names(first) & identifiers(second)) and not (
        _written_names(second) & identifiers(first)
    )


@register(TransformId.SWAP_STATEMENT)
def swap_statement(tree: SyntaxTree, context: TransformContext) -> Rewriter:
    """交换相邻且互不依赖的两条语句"""

    def planner(block: Node) -> Plan:
        plan: Plan = []
        members = children_of(block)
        i = 0
        while i + 1 < len(members):
            first, second = members[i], members[i + 1]
            if independent(first, second):
                plan.append((first, second, _writer(first, second)))
                i += 2
            else:
                i += 1
        return plan

    def _writer(first: Node, second: Node) -> Writer:
        def write(builder: TextBuilder) -> None:
            rewriter.copy(second.start_byte, second.end_byte, builder, second)
            builder.copy(first.end_byte, second.start_byte)
            rewriter.copy(first.start_byte, first.end_byte, builder, first)

        return write

    rewriter = block_rule(tree, planner)
    return rewriter


# ---- MergeVarDecl ----

def _declaration_head(tree: SyntaxTree, declaration: Node) -> Optional[str]:
    """声明中第一个声明符之前的部分 (修饰符 + 类型)"""
    declarators = declaration.children_by_field_name("declarator")
    type_node = declaration.child_by_field_name("type")
    if not declarators or type_node is None or tree.text(type_node) == "var":
        return None
    return tree.slice(declaration.start_byte, declarators[0].start_byte)


@register(TransformId.MERGE_VAR_DECL)
def merge_var_decl(tree: SyntaxTree, context: TransformContext) -> Rewriter:
    """int a = 1; int b = 2;  ->  int a = 1, b = 2;"""

    def runs(block: Node) -> List[List[Node]]:
        found: List[List[Node]] = []
        current: List[Node] = []
        head = None
        for member in children_of(block):
            member_head = (
                _declaration_head(tree, member) if member.type == "local_variable_declaration" else None
            )
            if member_head is not None and current and " ".join(member_head.split()) == head:
                current.append(member)
                continue
            if len(current) > 1:
                found.append(current)
            current = [member] if member_head is not None else []
            head = " ".join(member_head.split()) if member_head is not None else None
        if len(current) > 1:
            found.append(current)
        return found

    def planner(block: Node) -> Plan:
        return [(run[0], run[-1], _writer(run)) for run in runs(block)]

    def _writer(run: List[Node]) -> Writer:
        def write(builder: TextBuilder) -> None:
            for later in run[1:]:
                builder.mark(later.start_byte)
            for position, declaration in enumerate(run):
                declarators = declaration.children_by_field_name("declarator")
                start = declaration.start_byte if position == 0 else declarators[0].start_byte
                if position > 0:
                    builder.write(", ")
                rewriter.copy(start, declarators[-1].end_byte, builder, declaration)
            builder.write(";")

        return write

    rewriter = block_rule(tree, planner)
    return rewriter


# ---- InfixDividing ----

def _arithmetic(node: Node) -> bool:
    if node.type == "parenthesized_expression":
        inner = inner_expression(node)
        return inner is not None and _arithmetic(inner)
    return node.type == "binary_expression" and operator_of(node) in ARITHMETIC


def _split_target(statement: Node) -> Optional[Node]:
    """语句中可拆分的算术表达式"""
    if statement.type == "expression_statement" and statement.named_children:
        expr = statement.named_children[0]
        if expr.type != "assignment_expression" or operator_of(expr) != "=":
            return None
        return expr.child_by_field_name("right")
    if statement.type == "local_variable_declaration":
        declarators = statement.children_by_field_name("declarator")
        if len(declarators) != 1:
            return None
        return declarators[0].child_by_field_name("value")
    return None


@register(TransformId.INFIX_DIVIDING)
def infix_dividing(tree: SyntaxTree, context: TransformContext) -> Rewriter:
    """x = a + b * c;  ->  int temp1 = b * c; x = a + temp1;"""
    taken_by_method: Dict[tuple, Set[str]] = {}

    def taken_names(node: Node) -> Set[str]:
        method = enclosing_method(node)
        key = node_key(method) if method is not None else ()
        if key not in taken_by_method:
            taken_by_method[key] = identifiers(tree.root)
        return taken_by_method[key]

    def subexpression(statement: Node) -> Optional[Tuple[Node, str]]:
        value = _split_target(statement)
        if value is None or value.type != "binary_expression":
            return None
        if operator_of(value) not in ARITHMETIC or not is_pure(value):
            return None
        method = enclosing_method(statement)
        types = declared_types(method) if method is not None else {}
        for operand in (value.child_by_field_name("right"), value.child_by_field_name("left")):
            if _arithmetic(operand):
                kind = numeric_type(operand, types)
                if kind is not None:
                    return operand, kind
        return None

    def planner(block: Node) -> Plan:
        plan: Plan = []
        for statement in statements_of(block):
            found = subexpression(statement)
            if found is not None:
                plan.append((statement, statement, _writer(statement, *found)))
        return plan

    def _writer(statement: Node, sub: Node, kind: str) -> Writer:
        def write(builder: TextBuilder) -> None:
            name = fresh_name("temp", taken_names(statement))
            inner = sub
            while inner.type == "parenthesized_expression":
                inner = inner_expression(inner)
            builder.write(f"{kind} {name} = ")
            builder.write(tree.text(inner))
            builder.write(";\n" + tree.indent_of(statement))
            builder.mark(statement.start_byte)
            rewriter.copy(statement.start_byte, sub.start_byte, builder, statement)
            builder.write(name)
            rewriter.copy(sub.end_byte, statement.end_byte, builder, statement)

        return write

    rewriter = block_rule(tree, planner)
    return rewriter


# ---- ReverseIf ----

@register(TransformId.REVERSE_IF)
def reverse_if(tree: SyntaxTree, context: TransformContext) -> Rewriter:
    """if (c) A else B  ->  if (!(c)) B else A"""

    def match(node: Node) -> bool:
        if node.type != "if_statement" or condition_of(node) is None:
            return False
        alternative = node.child_by_field_name("alternative")
        return alternative is not None and alternative.type != "if_statement"

    def build(node: Node, builder: TextBuilder) -> None:
        condition = node.child_by_field_name("condition")
        consequence = node.child_by_field_name("consequence")
        alternative = node.child_by_field_name("alternative")
        builder.copy(node.start_byte, condition.start_byte)
        builder.write("(!(")
        rewriter.emit(condition_of(node), builder)
        builder.write("))")
        builder.copy(condition.end_byte, consequence.start_byte)
        write_braced(rewriter, alternative, builder, tree.indent_of(node))
        builder.copy(consequence.end_byte, alternative.start_byte)
        rewriter.emit(consequence, builder)

    rewriter = Rewriter(tree, match, build)
    return rewriter


# ---- If2CondExp ----

def _single_statement(branch: Node) -> Optional[Node]:
    if branch.type != "block":
        return branch
    members = children_of(branch)
    if len(members) != 1 or members[0].type in COMMENT_TYPES:
        return None
    return members[0]


def _plain_assignment(statement: Node) -> Optional[Node]:
    if statement.type != "expression_statement" or not statement.named_children:
        return None
    expr = statement.named_children[0]
    if expr.type == "assignment_expression" and operator_of(expr) == "=":
        return expr
    return None


def _returned(statement: Node) -> Optional[Node]:
    if statement.type != "return_statement":
        return None
    values = [c for c in statement.named_children if c.type not in COMMENT_TYPES]
    return values[0] if values else None


@register(TransformId.IF_2_COND_EXP)
def if_2_cond_exp(tree: SyntaxTree, context: TransformContext) -> Rewriter:
    """if (c) x = a; else x = b;  ->  x = c ? a : b;  (return 同理)"""

    def branches(node: Node) -> Optional[Tuple[str, Node, Node]]:
        if node.type != "if_statement" or condition_of(node) is None:
            return None
        alternative = node.child_by_field_name("alternative")
        if alternative is None or alternative.type == "if_statement":
            return None
        then_stmt = _single_statement(node.child_by_field_name("consequence"))
        else_stmt = _single_statement(alternative)
        if then_stmt is None or else_stmt is None:
            return None
        then_assign, else_assign = _plain_assignment(then_stmt), _plain_assignment(else_stmt)
        if then_assign is not None and else_assign is not None:
            target = then_assign.child_by_field_name("left")
            if tree.text(target) != tree.text(else_assign.child_by_field_name("left")):
                return None
            if not is_pure(target):
                return None
            return (
                tree.text(target) + " = ",
                then_assign.child_by_field_name("right"),
                else_assign.child_by_field_name("right"),
            )
        then_value, else_value = _returned(then_stmt), _returned(else_stmt)
        if then_value is not None and else_value is not None:
            return "return ", then_value, else_value
        return None

    def operand(node: Node, builder: TextBuilder, minimum: int) -> None:
        if precedence(node) < minimum:
            builder.write("(")
            rewriter.emit(node, builder)
            builder.write(")")
        else:
            rewriter.emit(node, builder)

    def match(node: Node) -> bool:
        return branches(node) is not None

    def build(node: Node, builder: TextBuilder) -> None:
        head, then_value, else_value = branches(node)
        builder.write(head)
        operand(condition_of(node), builder, 3)
        builder.write(" ? ")
        operand(then_value, builder, 2)
        builder.write(" : ")
        operand(else_value, builder, 2)
        builder.write(";")

    rewriter = Rewriter(tree, match, build)
    return rewriter


# ---- CondExp2If ----

@register(TransformId.COND_EXP_2_IF)
def cond_exp_2_if(tree: SyntaxTree, context: TransformContext) -> Rewriter:
    """return c ? a : b;  ->  if (c) { return a; } else { return b; }  (赋值和声明同理)"""

    def parts(node: Node) -> Optional[Tuple[str, str, Node]]:
        """(声明前缀, 分支语句前缀, 条件表达式)"""
        if not is_block_member(node):
            return None
        if node.type == "return_statement":
            value = _returned(node)
            if value is not None and value.type == "ternary_expression":
                return "", "return ", value
            return None
        if node.type == "expression_statement" and node.named_children:
            expr = node.named_children[0]
            if expr.type != "assignment_expression":
                return None
            right = expr.child_by_field_name("right")
            if right.type != "ternary_expression":
                return None
            left = expr.child_by_field_name("left")
            return "", f"{tree.text(left)} {operator_of(expr)} ", right
        if node.type == "local_variable_declaration":
            declarators = node.children_by_field_name("declarator")
            type_node = node.child_by_field_name("type")
            if len(declarators) != 1 or type_node is None or tree.text(type_node) == "var":
                return None
            value = declarators[0].child_by_field_name("value")
            if value is None or value.type != "ternary_expression":
                return None
            name = tree.text(declarators[0].child_by_field_name("name"))
            head = tree.slice(node.start_byte, declarators[0].start_byte) + tree.slice(
                declarators[0].start_byte, value.start_byte
            ).split("=")[0].rstrip()
            return head + ";", f"{name} = ", value
        return None

    def match(node: Node) -> bool:
        return parts(node) is not None

    def build(node: Node, builder: TextBuilder) -> None:
        declaration, prefix, ternary = parts(node)
        indent = tree.indent_of(node)
        condition = ternary.child_by_field_name("condition")
        while condition.type == "parenthesized_expression":
            condition = inner_expression(condition)
        if declaration:
            builder.write(declaration + "\n" + indent)
            builder.mark(node.start_byte)
        builder.write("if (")
        rewriter.emit(condition, builder)
        builder.write(") {\n" + indent + INDENT + prefix)
        rewriter.emit(ternary.child_by_field_name("consequence"), builder)
        builder.write(";\n" + indent + "} else {\n" + indent + INDENT + prefix)
        rewriter.emit(ternary.child_by_field_name("alternative"), builder)
        builder.write(";\n" + indent + "}")

    rewriter = Rewriter(tree, match, build)
    return rewriter


# ---- DividingComposedIf ----

@register(TransformId.DIVIDING_COMPOSED_IF)
def dividing_composed_if(tree: SyntaxTree, context: TransformContext) -> Rewriter:
    """
    拆分复合条件

    if (a && b) S [else E]  ->  if (a) { if (b) S [else E] } [else E]
    if (a || b) S [else E]  ->  if (a) S else if (b) S [else E]
    """

    def connective(node: Node) -> Optional[Node]:
        if node.type != "if_statement":
            return None
        condition = condition_of(node)
        if condition is None or condition.type != "binary_expression":
            return None
        return condition if operator_of(condition) in ("&&", "||") else None

    def match(node: Node) -> bool:
        return connective(node) is not None

    def build(node: Node, builder: TextBuilder) -> None:
        condition = connective(node)
        left = condition.child_by_field_name("left")
        right = condition.child_by_field_name("right")
        consequence = node.child_by_field_name("consequence")
        alternative = node.child_by_field_name("alternative")
        indent = tree.indent_of(node)

        builder.write("if (")
        rewriter.emit(left, builder)
        builder.write(") ")
        if operator_of(condition) == "&&":
            builder.write("{\n" + indent + INDENT + "if (")
            rewriter.emit(right, builder)
            builder.write(") ")
            rewriter.emit(consequence, builder)
            if alternative is not None:
                builder.write(" else ")
                rewriter.emit(alternative, builder)
            builder.write("\n" + indent + "}")
            if alternative is not None:
                builder.write(" else ")
                rewriter.emit(alternative, builder)
            return

        write_braced(rewriter, consequence, builder, indent)
        builder.write(" else if (")
        rewriter.emit(right, builder)
        builder.write(") ")
        write_braced(rewriter, consequence, builder, indent)
        if alternative is not None:
            builder.write(" else ")
            rewriter.emit(alternative, builder)

    rewriter = Rewriter(tree, match, build)
    return rewriter

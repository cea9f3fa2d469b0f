"""
控制流分类

纯语法规则, 只看语句级节点 (条件表达式 ?: 不算分支):
- NestedLoop: 存在词法上包含另一个循环的循环
- MultiPathLoop: 循环体内有分支或 break/continue/return
- SinglePathLoop: 有循环但循环体内没有上述结构
- Branching: 没有循环, 有 if/switch
- Sequential: 其余
"""

from astcore.syntax import (
    BRANCH_TYPES,
    EXIT_TYPES,
    LOOP_TYPES,
    SCOPE_BOUNDARY_TYPES,
    find_all,
    has_descendant,
    parse,
)
from .models import ControlFlowClass


def classify_control_flow(bare_source: str) -> ControlFlowClass:
    """
    计算程序的控制流类别

    Args:
        bare_source: 不含注解的源码

    Returns:
        ControlFlowClass

    Raises:
        ParseFailure: 源码无法解析
    """
    root = parse(bare_source).root
    loops = find_all(root, LOOP_TYPES)
    if not loops:
        if find_all(root, BRANCH_TYPES):
            return ControlFlowClass.BRANCHING
        return ControlFlowClass.SEQUENTIAL

    if any(has_descendant(loop, LOOP_TYPES, SCOPE_BOUNDARY_TYPES) for loop in loops):
        return ControlFlowClass.NESTED_LOOP

    multi_path = BRANCH_TYPES | EXIT_TYPES
    for loop in loops:
        body = loop.child_by_field_name("body")
        if body is None:
            continue
        if body.type in multi_path or has_descendant(body, multi_path, SCOPE_BOUNDARY_TYPES):
            return ControlFlowClass.MULTI_PATH_LOOP
    return ControlFlowClass.SINGLE_PATH_LOOP

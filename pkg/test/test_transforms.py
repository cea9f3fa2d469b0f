"""
语义保持变换测试 - 18 种变换的可应用性、典型改写与注解保持
"""

import sys
import logging
from test_config import read_program, run_module_tests

from astcore.annotations import count_spec_comments, strip_annotations
from astcore.syntax import normalize_whitespace, parses
from transforms import (
    SynonymNameProvider,
    TransformContext,
    TransformId,
    applicable_transforms,
    apply,
    resolve_transforms,
    variant_id,
)

logger = logging.getLogger("语义保持变换测试")

GOLDEN = """class Golden {
    void f(int a, int b, int i) {
        i++;
        a += 9;
        boolean c = a < b;
    }
}
"""


def test_all_transforms_apply_to_showcase():
    """展示程序覆盖全部 18 种变换, 每个变体都能解析"""
    logger.info("开始测试全部变换...")
    source = read_program("Showcase.java")
    assert applicable_transforms(source) == set(TransformId)
    for transform in TransformId:
        result = apply(transform, source)
        assert result.applicable, transform.value
        assert result.sites_rewritten >= 1, transform.value
        assert result.variant_source != source, transform.value
        assert parses(result.variant_source), transform.value
        logger.info(f"{transform.value}: {result.sites_rewritten} 处改写")


def test_golden_rewrites():
    logger.info("开始测试典型改写...")
    unary = apply("Unary2Add", GOLDEN)
    assert unary.applicable and unary.sites_rewritten == 1
    assert "i = i + 1;" in unary.variant_source
    assert "i++" not in unary.variant_source

    compound = apply(TransformId.ADD_2_EQUAL, GOLDEN)
    assert "a = a + 9;" in compound.variant_source
    assert "+=" not in compound.variant_source

    relation = apply(TransformId.SWITCH_RELATION, GOLDEN)
    assert "boolean c = b > a;" in relation.variant_source


def test_add2equal_parenthesizes():
    source = GOLDEN.replace("a += 9;", "a += b - 1;")
    result = apply(TransformId.ADD_2_EQUAL, source)
    assert "a = a + (b - 1);" in result.variant_source


def test_not_applicable():
    """没有可改写位置时返回原文"""
    source = read_program("Loop.java")
    for transform in (TransformId.SWITCH_2_IF, TransformId.SWITCH_STRING_EQUAL, TransformId.ELSE_IF_2_IF):
        result = apply(transform, source)
        assert not result.applicable
        assert result.sites_rewritten == 0
        assert result.variant_source == source


def _method(body: str) -> str:
    return "class A {\n    int f(int[] a, int i, int n, int x, int y) {\n" + body + "\n        return 0;\n    }\n}\n"


def test_switch_operands_with_side_effects():
    """操作数有副作用时不交换, 否则求值顺序改变"""
    logger.info("开始测试副作用操作数...")
    impure = _method("        if (a[i++] < a[i]) {\n            return 1;\n        }\n        boolean b = a[i++] == a[i];")
    assert not apply(TransformId.SWITCH_RELATION, impure).applicable
    assert not apply(TransformId.SWITCH_EQUAL_EXP, impure).applicable

    calls = _method("        boolean b = next(a) != next(a);\n        boolean c = x < (y = 2);")
    assert not apply(TransformId.SWITCH_EQUAL_EXP, calls).applicable
    assert not apply(TransformId.SWITCH_RELATION, calls).applicable

    mixed = _method("        boolean b = a[i++] <= a[i];\n        boolean c = a[i] <= n;")
    result = apply(TransformId.SWITCH_RELATION, mixed)
    assert result.sites_rewritten == 1
    assert "boolean c = n >= a[i];" in result.variant_source
    assert "a[i++] <= a[i]" in result.variant_source


def test_for_body_that_never_completes():
    """循环体末尾不可达时不改写 for, 否则更新语句成为死代码"""
    for body in (
        "        for (int k = 0; k < n; k++) {\n            return a[k];\n        }",
        "        for (int k = 0; k < n; k++) {\n            if (a[k] > 0) {\n                return k;\n"
        "            } else {\n                break;\n            }\n        }",
        "        for (int k = 0; k < n; k++) {\n            while (true) {\n                x++;\n            }\n        }",
        "        for (int k = 0; k < n; k++)\n            throw new IllegalStateException();",
    ):
        source = _method(body)
        assert parses(source), body
        result = apply(TransformId.FOR_2_WHILE, source)
        assert not result.applicable, body
        assert result.variant_source == source

    reachable = _method(
        "        for (int k = 0; k < n; k++) {\n            if (a[k] > 0) {\n                return k;\n            }\n        }"
    )
    result = apply(TransformId.FOR_2_WHILE, reachable)
    assert result.applicable
    assert "while (k < n)" in result.variant_source
    assert parses(result.variant_source)

    # 没有更新部分时无需追加语句
    no_update = _method("        for (; i < n;) {\n            return a[i];\n        }")
    assert apply(TransformId.FOR_2_WHILE, no_update).applicable


def test_swap_keeps_throwing_statements_in_order():
    """可能抛异常的语句不与其他有副作用的语句交换"""
    for body in (
        "        x = a[i];\n        y = 2;",
        "        x = 10 / i;\n        y = 2;",
        "        x = 2;\n        y %= n;",
    ):
        assert not apply(TransformId.SWAP_STATEMENT, _method(body)).applicable, body
    swapped = apply(TransformId.SWAP_STATEMENT, _method("        x = i;\n        y = 2;"))
    assert swapped.applicable
    assert swapped.variant_source.index("y = 2;") < swapped.variant_source.index("x = i;")


def test_for_while_inverse():
    """For2While 之后 While2For 得到原程序 (忽略空白)"""
    logger.info("开始测试循环互逆...")
    source = read_program("Loop.java")
    as_while = apply(TransformId.FOR_2_WHILE, source)
    assert as_while.applicable
    assert "while (i < n)" in as_while.variant_source
    assert "for (" not in as_while.variant_source
    back = apply(TransformId.WHILE_2_FOR, as_while.variant_source)
    assert back.applicable
    assert normalize_whitespace(back.variant_source) == normalize_whitespace(source)


def test_annotations_preserved():
    """变换保持注解子句数不变"""
    logger.info("开始测试注解保持...")
    source = read_program("MaxAchievable.java")
    _, original = strip_annotations(source)
    applied = 0
    for transform in TransformId:
        result = apply(transform, source)
        if not result.applicable:
            continue
        applied += 1
        _, index = strip_annotations(result.variant_source)
        assert index.clause_count == original.clause_count, transform.value
        assert count_spec_comments(result.variant_source) == 7, transform.value
    assert applied >= 3
    renamed = apply(TransformId.VARIABLE_RENAMING_1, source).variant_source
    assert parses(renamed)


def test_renaming_uses_provider():
    source = read_program("Loop.java")
    context = TransformContext(name_provider=SynonymNameProvider({"s": "acc", "i": "idx", "n": "limit"}))
    result = apply(TransformId.VARIABLE_RENAMING_2, source, context)
    assert result.applicable
    assert "int acc = 0;" in result.variant_source
    assert "idx < limit" in result.variant_source


def test_resolve_and_ids():
    assert resolve_transforms() == list(TransformId)
    assert resolve_transforms(["While2For", "VariableRenaming1"]) == [
        TransformId.VARIABLE_RENAMING_1,
        TransformId.WHILE_2_FOR,
    ]
    assert variant_id("maximum", TransformId.REVERSE_IF) == "maximum__ReverseIf"
    try:
        resolve_transforms(["NoSuchTransform"])
    except ValueError:
        pass
    else:
        raise AssertionError("未知变换名应当报错")


if __name__ == "__main__":
    sys.exit(run_module_tests(dict(globals()), logger))

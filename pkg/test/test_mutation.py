"""
变异体生成测试 - 算子、等价抑制、完备性输入与导出
"""

import os
import sys
import logging
from test_config import read_program, run_module_tests, temp_dir

from astcore.annotations import SpecifiedProgram, count_spec_comments, same_code, strip_annotations
from astcore.syntax import parses
from mutation import (
    MutationOperator,
    canonical_source,
    completeness_inputs,
    export_mutants,
    generate_mutants,
    load_mutants,
    suppress_equivalents,
)

logger = logging.getLogger("变异体生成测试")

TIMES_ONE = """class TimesOne {
    int f(int x) {
        return x * 1;
    }
}
"""

INCREMENT = """class Inc {
    static int inc(int x) {
        int y = x;
        //@ assert y == x;
        y = y + 1;
        return y;
    }
}
"""


def _maximum_bare() -> str:
    return strip_annotations(read_program("Maximum.java"))[0]


def test_maximum_mutants():
    logger.info("开始测试 Maximum 变异体...")
    mutants = generate_mutants(_maximum_bare(), parent_id="maximum")
    assert len(mutants) == 6
    assert mutants.by_operator() == {"RelationalOpReplace": 5, "UnaryInsert": 1}
    assert [m.id for m in mutants] == [f"maximum__m{i:03d}" for i in range(1, 7)]
    sources = {m.source for m in mutants}
    assert len(sources) == 6 and mutants.parent_source not in sources
    assert all(parses(m.source) for m in mutants)
    assert any("!(a > b)" in m.source for m in mutants)
    assert len(suppress_equivalents(mutants).suppressed) == 0


def test_equivalent_suppression():
    """x * 1 -> x / 1 与父程序等价, 被抑制"""
    logger.info("开始测试等价抑制...")
    mutants = generate_mutants(TIMES_ONE, parent_id="times_one")
    assert mutants.by_operator() == {"ArithmeticOpReplace": 4, "LiteralReplace": 2}
    filtered = suppress_equivalents(mutants)
    assert len(filtered) == 5
    assert len(filtered.suppressed) == 1
    dropped = filtered.suppressed[0]
    assert dropped.suppressed
    assert dropped.operator == MutationOperator.ARITHMETIC_OP_REPLACE
    assert dropped.replacement == "/"
    assert canonical_source(TIMES_ONE) == canonical_source(TIMES_ONE.replace("x * 1", "x"))
    assert canonical_source("class A { boolean f(int a, int b) { return a > b; } }") == canonical_source(
        "class A { boolean f(int a, int b) { return (b < a); } }"
    )


def test_operator_details():
    literal = "class L {\n    boolean f() {\n        int x = 5;\n        boolean b = true;\n        return b;\n    }\n}\n"
    mutants = generate_mutants(literal, operators=["LiteralReplace"], parent_id="lit")
    assert [m.replacement for m in mutants] == ["6", "4", "0", "false"]

    concat = "class S {\n    String f(String s) {\n        return s + \"x\";\n    }\n}\n"
    assert len(generate_mutants(concat, operators=[MutationOperator.ARITHMETIC_OP_REPLACE])) == 0

    logical = "class G {\n    boolean f(boolean p, boolean q) {\n        return p && q;\n    }\n}\n"
    swapped = generate_mutants(logical, operators=["LogicalConnectorReplace"])
    assert len(swapped) == 1 and "p || q" in swapped.mutants[0].source
    assert swapped.mutants[0].id == "program__m001"

    deletion = generate_mutants(strip_annotations(INCREMENT)[0], operators=["StatementDelete"], parent_id="inc")
    assert len(deletion) == 1
    assert "y = y + 1;" not in deletion.mutants[0].source
    assert "int y = x;" in deletion.mutants[0].source


def test_completeness_inputs():
    logger.info("开始测试完备性输入...")
    source = read_program("Maximum.java")
    bare, index = strip_annotations(source)
    spec = SpecifiedProgram(source, index, "maximum")
    mutants = generate_mutants(bare, parent_id="maximum")
    inputs = completeness_inputs(spec, mutants)
    assert len(inputs) == 6 and not inputs.skipped
    for mutant, program in inputs:
        assert count_spec_comments(program.source) == 1
        assert same_code(program.source, mutant.source)
        assert strip_annotations(program.source)[1].clause_count == 3


def test_completeness_skips_deleted_anchor():
    """删除了注解锚点语句的变异体被跳过"""
    bare, index = strip_annotations(INCREMENT)
    mutants = generate_mutants(bare, operators=["StatementDelete"], parent_id="inc")
    inputs = completeness_inputs(SpecifiedProgram(INCREMENT, index, "inc"), mutants)
    assert len(inputs) == 0
    assert [mutant_id for mutant_id, _ in inputs.skipped] == ["inc__m001"]

    try:
        completeness_inputs(SpecifiedProgram(read_program("Maximum.java"), index), mutants)
    except ValueError:
        pass
    else:
        raise AssertionError("规格与父程序不一致应当报错")


def test_export_and_load():
    logger.info("开始测试变异体导出...")
    filtered = suppress_equivalents(generate_mutants(TIMES_ONE, parent_id="times_one"))
    with temp_dir() as directory:
        ledger = os.path.join(directory, "mutants.csv")
        written = export_mutants([filtered], os.path.join(directory, "mutants"), ledger)
        assert written == 6
        assert os.path.isfile(os.path.join(directory, "mutants", "times_one", "times_one__m001.java"))
        loaded = load_mutants(os.path.join(directory, "mutants"), ledger, {"times_one": TIMES_ONE})
        assert len(loaded) == 1
        restored = loaded[0]
        assert [m.id for m in restored.mutants] == [m.id for m in filtered.mutants]
        assert [m.replacement for m in restored.mutants] == [m.replacement for m in filtered.mutants]
        assert [m.id for m in restored.suppressed] == [m.id for m in filtered.suppressed]


if __name__ == "__main__":
    sys.exit(run_module_tests(dict(globals()), logger))

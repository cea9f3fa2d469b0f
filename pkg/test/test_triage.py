"""
失败分诊测试 - 原子错误拆分、模式匹配与类别分布
"""

import os
import sys
import json
import random
import logging
from test_config import read_fixture, run_module_tests, temp_dir

from core.exceptions import ConfigError
from evaluation import (
    FailureCategory,
    PatternTable,
    categorize,
    distribution,
    dominant_category,
    split_atomic,
    triage_outcome,
)
from evaluation.triage import AtomicError
from verifier import Diagnostic, OutcomeKind, VerificationOutcome, parse_diagnostics

logger = logging.getLogger("失败分诊测试")

PREFIX = "The prover cannot establish an assertion "


def _diag(file: str, line: int, message: str) -> Diagnostic:
    return Diagnostic(f"/tmp/{file}.java", line, message)


def test_known_messages():
    """典型验证器消息映射到对应类别"""
    logger.info("开始测试消息分类...")
    table = PatternTable.load()
    expected = [
        (_diag("ReArrangeTuples", 49, PREFIX + "(Postcondition: /tmp/ReArrangeTuples.java:14:) in method reArrangeTuples"), "PostconditionFailure"),
        (_diag("RemoveNested", 37, PREFIX + "(ArithmeticOperationRange) in method removeNested: overflow in int sum"), "ArithmeticOperationRange"),
        (_diag("NthNums", 24, PREFIX + "(Postcondition: /tmp/NthNums.java:13:) in method nthNums"), "PostconditionFailure"),
        (_diag("FindMinDiff", 31, PREFIX + "(Assert) in method findMinDiff"), "AssertionFailure"),
        (_diag("FindCharLong", 25, PREFIX + "(PossiblyNullDeReference) in method findCharLong"), "NullDereference"),
        (_diag("RoundNum", 26, PREFIX + "(PossiblyDivideByZero) in method roundNum"), "DivideByZero"),
        (_diag("Sum", 21, PREFIX + "(PossiblyTooLargeIndex) in method sum"), "ArrayIndexFailure"),
        (_diag("Sort", 9, PREFIX + "(LoopInvariant) in method sort"), "LoopInvariantFailure"),
        (_diag("Count", 5, "assignable clauses are not allowed here"), "SyntaxError"),
        (_diag("CountSetBits", 7, "The \\sum quantifier is not yet supported"), "UnsupportedQuantifier"),
        (_diag("MaxOf", 7, "\\max is not implemented for this type"), "UnsupportedMinMaxQuantifier"),
        (_diag("Call", 3, PREFIX + "(Precondition: /tmp/Call.java:2:) in method call"), "Other(PreconditionFailure)"),
        (_diag("Odd", 3, "something the table has never seen"), "Other(unmatched)"),
    ]
    for diagnostic, name in expected:
        assert str(categorize(diagnostic, table)) == name, diagnostic.raw_message


def test_fixture_output():
    table = PatternTable.load()
    outcome = VerificationOutcome(
        OutcomeKind.FAILURE, tuple(parse_diagnostics(read_fixture("verifier", "openjml_output.txt")))
    )
    errors = triage_outcome(outcome, table)
    assert len(errors) == 7
    ranked = distribution(errors, 3)
    assert [(str(c), n) for c, n in ranked] == [
        ("PostconditionFailure", 2),
        ("ArithmeticOperationRange", 1),
        ("ArrayIndexFailure", 1),
    ]
    assert str(dominant_category(errors)) == "PostconditionFailure"
    row = errors[0].to_row("rearrange")
    assert row["record_id"] == "rearrange" and row["line"] == 49
    assert row["matched_pattern"] == "(Postcondition"


def test_split_atomic():
    repeated = _diag("Sum", 21, PREFIX + "(PossiblyTooLargeIndex) in method sum")
    other_line = _diag("Sum", 22, PREFIX + "(PossiblyTooLargeIndex) in method sum")
    loose = Diagnostic("", None, "Note: something", kind="output")
    atoms = split_atomic([repeated, loose, repeated, other_line])
    assert atoms == [repeated, other_line]


def test_invalid_and_success():
    table = PatternTable.load()
    invalid = triage_outcome(VerificationOutcome.invalid("NoCodeBlock"), table)
    assert len(invalid) == 1
    assert str(invalid[0].category) == "InvalidSpecification"
    assert "NoCodeBlock" in invalid[0].diagnostic.raw_message
    assert triage_outcome(VerificationOutcome(OutcomeKind.SUCCESS), table) == []
    assert dominant_category([]) is None


def test_distribution_order():
    """分布与输入顺序无关, 并列时按类别名排序"""
    logger.info("开始测试分布排序...")
    names = ["DivideByZero"] * 3 + ["AssertionFailure"] * 3 + ["SyntaxError"] * 5 + ["NullDereference"]
    errors = [
        AtomicError(_diag("X", i + 1, name), FailureCategory.named(name)) for i, name in enumerate(names)
    ]
    expected = [("SyntaxError", 5), ("AssertionFailure", 3), ("DivideByZero", 3)]
    rng = random.Random(3)
    for _ in range(20):
        rng.shuffle(errors)
        assert [(str(c), n) for c, n in distribution(errors, 3)] == expected
    assert len(distribution(errors, 10)) == 4
    try:
        distribution(errors, 0)
    except ValueError:
        pass
    else:
        raise AssertionError("k=0 应当报错")


def test_failure_category():
    assert str(FailureCategory.named("Mystery")) == "Other(Mystery)"
    assert FailureCategory.parse("Other(Mystery)") == FailureCategory("Other", "Mystery")
    assert FailureCategory.parse("DivideByZero").name == "DivideByZero"
    for name, label in (("Other", ""), ("NotACategory", "")):
        try:
            FailureCategory(name, label)
        except ValueError:
            continue
        raise AssertionError(f"{name} 应当报错")


def test_custom_pattern_table():
    """自定义模式表: 规则顺序决定类别, 支持正则"""
    rules = {
        "rules": [
            {"pattern": "overflow in int (sum|product)", "category": "Other", "label": "Overflow", "regex": True},
            {"pattern": "(ArithmeticOperationRange", "category": "ArithmeticOperationRange"},
        ]
    }
    diagnostic = _diag("RemoveNested", 37, PREFIX + "(ArithmeticOperationRange) in method removeNested: overflow in int sum")
    with temp_dir() as directory:
        path = os.path.join(directory, "patterns.json")
        with open(path, "w", encoding="utf-8") as f:
            json.dump(rules, f)
        table = PatternTable.load(path)
        assert str(categorize(diagnostic, table)) == "Other(Overflow)"

        with open(path, "w", encoding="utf-8") as f:
            json.dump({"rules": [{"pattern": "([", "category": "SyntaxError", "regex": True}]}, f)
        try:
            PatternTable.load(path)
        except ConfigError:
            pass
        else:
            raise AssertionError("非法正则应当报错")
    try:
        PatternTable.load(os.path.join("no", "such", "patterns.json"))
    except ConfigError:
        pass
    else:
        raise AssertionError("缺失的模式表应当报错")


if __name__ == "__main__":
    sys.exit(run_module_tests(dict(globals()), logger))

"""
自修复测试 - 按类别引导的修复循环与规格变异兜底
"""

import sys
import logging
from test_config import DESK_CORPUS, annotate, fenced, run_module_tests

from astcore.annotations import strip_annotations
from core.exceptions import ModelError
from corpus import load_corpus
from evaluation import PatternTable
from generation import (
    Completion,
    RepairTerminal,
    ScriptedStubClient,
    extract_specification,
    repair_many,
    repair_record,
    self_repair,
    spec_mutation_repair,
)
from generation.repair import mutation_candidates
from verifier import OutcomeKind, StubBackend, VerifierConfig

logger = logging.getLogger("自修复测试")

SIGNATURE = "public static int maximum"
REQUIRES = "requires a >= 0 && b >= 0;"
SYNTAX_ERROR = "/tmp/Maximum.java:3: error: assignable clauses are not allowed here\n1 error\n"
POSTCONDITION = (
    "/tmp/Maximum.java:4: verify: The prover cannot establish an assertion "
    "(Postcondition: /tmp/Maximum.java:3:) in method maximum\n1 verification failure\n"
)


def _maximum():
    return load_corpus(DESK_CORPUS).get("maximum")


def _spec(*clauses: str) -> str:
    return annotate(_maximum().bare_source, SIGNATURE, clauses)


def _fixed(source: str) -> str:
    return "### FIXED SPECIFICATION\n\n" + fenced(source)


class FlakyClient:
    """第一次调用返回给定回复, 之后失败"""

    name = "flaky"

    def __init__(self, first: str):
        self.first = first
        self.calls = 0

    def complete(self, bundle, record_id):
        self.calls += 1
        if self.calls > 1:
            raise ModelError("connection reset", record_id=record_id)
        return Completion(self.first, 10, 5, "flaky")


def test_repair_syntax_error():
    """第一轮语法错误, 第二轮按 SyntaxError 模板修复后验证成功"""
    logger.info("开始测试语法错误修复...")
    record = _maximum()
    broken = _spec(REQUIRES, "assignable \\nothing;", "ensures \\result >= a;")
    repaired = _spec(REQUIRES, "ensures \\result >= a;")
    client = ScriptedStubClient({"maximum": [fenced(broken), _fixed(repaired)]})
    backend = StubBackend([{"contains": "assignable", "output": SYNTAX_ERROR, "exit_status": 1}])

    trace = self_repair(record, client, VerifierConfig(), backend, PatternTable.load(), max_iters=3)
    assert trace.terminal == RepairTerminal.SUCCESS
    assert trace.success_iteration == 2
    assert len(trace.iterations) == 2
    first, second = trace.iterations
    assert first.outcome.kind == OutcomeKind.FAILURE
    assert first.dominant == "SyntaxError"
    assert first.categories == [("SyntaxError", 1)]
    assert second.prompt.category == "SyntaxError"
    # 修复提示包含最新的规格
    assert "assignable \\nothing;" in second.prompt.user
    assert second.outcome.kind == OutcomeKind.SUCCESS
    assert trace.final_program.source == repaired
    assert trace.tokens > 0

    data = trace.to_dict()
    assert data["terminal"] == "Success"
    assert [i["dominant"] for i in data["iterations"]] == ["SyntaxError", None]
    assert len(trace.transcript()) == 2


def test_repair_exhausted_and_invalid():
    logger.info("开始测试修复轮数耗尽...")
    record = _maximum()
    failing = _spec(REQUIRES, "ensures \\result > a;")
    backend = StubBackend([{"contains": "\\result > a;", "output": POSTCONDITION, "exit_status": 1}])
    patterns = PatternTable.load()

    trace = self_repair(
        record, ScriptedStubClient({"maximum": [fenced(failing)]}), VerifierConfig(), backend, patterns, 3
    )
    assert trace.terminal == RepairTerminal.EXHAUSTED
    assert len(trace.iterations) == 3
    assert trace.success_iteration is None
    assert all(i.dominant == "PostconditionFailure" for i in trace.iterations)
    assert [i.prompt.category for i in trace.iterations] == [None, "PostconditionFailure", "PostconditionFailure"]

    invalid = self_repair(
        record, ScriptedStubClient({}, default="I am not sure."), VerifierConfig(), backend, patterns, 2
    )
    assert invalid.terminal == RepairTerminal.INVALID
    assert invalid.iterations[0].dominant == "InvalidSpecification"
    assert invalid.iterations[1].prompt.category == "InvalidSpecification"
    assert invalid.final_program is None

    unknown_backend = StubBackend([{"contains": "maximum", "output": "The prover reported unknown\n"}])
    unknown = self_repair(
        record, ScriptedStubClient({"maximum": [fenced(failing)]}), VerifierConfig(), unknown_backend, patterns, 2
    )
    assert unknown.iterations[0].outcome.kind == OutcomeKind.UNKNOWN
    assert unknown.iterations[0].dominant is None
    assert unknown.iterations[1].prompt.category == "Other(Unknown)"

    try:
        self_repair(record, ScriptedStubClient({}), VerifierConfig(), backend, patterns, 0)
    except ValueError:
        pass
    else:
        raise AssertionError("max_iters=0 应当报错")


def test_repair_partial_trace():
    """模型调用失败时异常携带已完成的轮次"""
    record = _maximum()
    client = FlakyClient(fenced(_spec(REQUIRES, "ensures \\result > a;")))
    backend = StubBackend([{"contains": "\\result > a;", "output": POSTCONDITION, "exit_status": 1}])
    try:
        self_repair(record, client, VerifierConfig(), backend, PatternTable.load(), 3)
    except ModelError as e:
        assert len(e.partial_trace.iterations) == 1
        assert e.partial_trace.terminal is None
    else:
        raise AssertionError("模型失败应当中止循环")


def test_mutation_candidates():
    _, index = strip_annotations(_spec(REQUIRES, "ensures \\result > a;"))
    candidates = list(mutation_candidates(index))
    assert len(candidates) == 2
    (dropped, first), (weakened, second) = candidates
    assert first.startswith("drop") and len(dropped) == 1
    assert dropped.clause_kinds == ["requires"]
    assert second.startswith("weaken")
    assert "\\result >= a;" in weakened.entries[1].text


def test_spec_mutation_repair():
    logger.info("开始测试规格变异修复...")
    record = _maximum()
    spec = extract_specification(
        fenced(_spec(REQUIRES, "ensures \\result > a;", "ensures \\result >= b;")), record
    ).program
    config = VerifierConfig()

    backend = StubBackend([{"contains": "\\result > a;", "output": POSTCONDITION, "exit_status": 1}])
    result = spec_mutation_repair(spec, config, backend, budget=5)
    assert result.program is not None
    assert result.calls == 1
    assert result.edit.startswith("drop")
    assert REQUIRES in result.program.source
    assert "\\result >= b;" in result.program.source
    assert result.to_dict()["repaired"]

    always = StubBackend([{"contains": "maximum", "output": POSTCONDITION, "exit_status": 1}])
    exhausted = spec_mutation_repair(spec, config, always, budget=1)
    assert exhausted.program is None and exhausted.reason == "BudgetExhausted" and exhausted.calls == 1

    single = extract_specification(fenced(_spec(REQUIRES, "ensures \\result > a;")), record).program
    nothing = spec_mutation_repair(single, config, always, budget=10)
    assert nothing.reason == "NoVerifyingEdit" and nothing.calls == 2

    try:
        spec_mutation_repair(spec, config, always, budget=0)
    except ValueError:
        pass
    else:
        raise AssertionError("budget=0 应当报错")


def test_repair_record_fallback():
    """修复轮数耗尽后由规格变异修复兜底"""
    logger.info("开始测试修复兜底...")
    corpus = load_corpus(DESK_CORPUS)
    failing = _spec(REQUIRES, "ensures \\result > a;")
    backend = StubBackend([{"contains": "\\result > a;", "output": POSTCONDITION, "exit_status": 1}])
    kwargs = dict(
        client=ScriptedStubClient({"maximum": [fenced(failing)]}, default="no code"),
        config=VerifierConfig(),
        backend=backend,
        patterns=PatternTable.load(),
        max_iters=1,
        mutation_fallback=True,
    )
    trace = repair_record(corpus.get("maximum"), **kwargs)
    assert trace.terminal == RepairTerminal.EXHAUSTED
    assert trace.fallback is not None and trace.fallback.program is not None
    assert trace.final_program is trace.fallback.program
    assert "\\result > a;" not in trace.final_program.source

    traces = repair_many(list(corpus), workers=2, **kwargs)
    assert [t.record_id for t in traces] == [r.id for r in corpus]
    # 无效回复不触发兜底
    assert [t.fallback is not None for t in traces] == [r.id == "maximum" for r in corpus]


if __name__ == "__main__":
    sys.exit(run_module_tests(dict(globals()), logger))

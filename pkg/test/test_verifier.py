"""
验证器调度测试 - 输出解析、结果分类、桩/回放后端与结果归档
"""

import os
import sys
import shlex
import threading
import logging
from test_config import read_fixture, read_program, run_module_tests, temp_dir

from core.exceptions import BackendUnavailable, ConfigError
from astcore.annotations import SpecifiedProgram, strip_annotations
from database import ResultArchive
from verifier import (
    Diagnostic,
    ExternalProcessBackend,
    OutcomeKind,
    RawRun,
    ReplayBackend,
    ReplayStore,
    StubBackend,
    VerificationOutcome,
    VerifierConfig,
    classify_outcome,
    create_backend,
    parse_diagnostics,
    verify,
    verify_many,
)

logger = logging.getLogger("验证器调度测试")

POSTCONDITION = (
    "/tmp/Maximum.java:8: verify: The prover cannot establish an assertion "
    "(Postcondition: /tmp/Maximum.java:4:) in method maximum\n1 verification failure\n"
)


class CountingBackend:
    """记录调用次数的桩后端"""

    name = "counting"

    def __init__(self, run: RawRun):
        self.result = run
        self.calls = 0
        self._lock = threading.Lock()

    def run(self, source, config):
        with self._lock:
            self.calls += 1
        return self.result


def _specified(source: str, base_id: str) -> SpecifiedProgram:
    return SpecifiedProgram(source, strip_annotations(source)[1], base_id)


def _maximum(replace_from: str = "", replace_to: str = "") -> SpecifiedProgram:
    source = read_program("Maximum.java")
    if replace_from:
        source = source.replace(replace_from, replace_to)
    _, index = strip_annotations(source)
    return SpecifiedProgram(source, index, "maximum")


def test_parse_diagnostics():
    logger.info("开始测试输出解析...")
    diagnostics = parse_diagnostics(read_fixture("verifier", "openjml_output.txt"))
    assert len(diagnostics) == 8
    leading = diagnostics[0]
    assert leading.file == "" and leading.line is None and leading.kind == "output"
    assert not leading.is_obligation

    obligations = [d for d in diagnostics if d.is_obligation]
    assert [d.line for d in obligations] == [49, 37, 24, 31, 25, 26, 21]
    first = obligations[0]
    assert first.file == "/tmp/ReArrangeTuples.java"
    assert first.raw_message.startswith("The prover cannot establish an assertion (Postcondition")
    assert first.context[:2] == ("        return res;", "        ^")
    # 关联声明并入上一条记录
    assert any("Associated declaration" in line for line in first.context)
    # 与证明无关的 warning 连同其摘录一起丢弃
    assert all("never read" not in d.raw_message for d in diagnostics)
    assert parse_diagnostics("") == []


def test_classify_outcome():
    obligation = Diagnostic("/tmp/A.java", 3, "The prover cannot establish an assertion (Assert)")
    loose = Diagnostic("", None, "Exception in thread main", kind="output")
    assert classify_outcome(0, [obligation], False, False) == OutcomeKind.INVALID
    assert classify_outcome(None, [], True, True) == OutcomeKind.UNKNOWN
    assert classify_outcome(0, [obligation], False, True, inconclusive=True) == OutcomeKind.UNKNOWN
    assert classify_outcome(1, [obligation], False, True) == OutcomeKind.FAILURE
    assert classify_outcome(1, [loose], False, True) == OutcomeKind.UNKNOWN
    assert classify_outcome(0, [], False, True) == OutcomeKind.SUCCESS


def test_outcome_invariants():
    obligation = Diagnostic("/tmp/A.java", 3, "The prover cannot establish an assertion (Assert)")
    for kind, diagnostics in (
        (OutcomeKind.SUCCESS, (obligation,)),
        (OutcomeKind.FAILURE, ()),
        (OutcomeKind.FAILURE, (Diagnostic("", None, "stray output", kind="output"),)),
    ):
        try:
            VerificationOutcome(kind, diagnostics)
        except ValueError:
            continue
        raise AssertionError(f"{kind} 不变量未生效")
    try:
        Diagnostic("/tmp/A.java", 0, "bad line")
    except ValueError:
        pass
    else:
        raise AssertionError("行号 0 应当报错")

    outcome = VerificationOutcome(OutcomeKind.FAILURE, (obligation,), 1.5, "raw", 1)
    assert VerificationOutcome.from_dict(outcome.to_dict()) == outcome


def test_verifier_config():
    config = VerifierConfig(timeout=30)
    command = config.command("/tmp/Max imum.java")
    assert command[0] == "openjml"
    assert command[-1] == "/tmp/Max imum.java"
    assert "--esc" in command
    assert VerifierConfig.from_dict({"timeout": 30}).signature() == config.signature()
    assert VerifierConfig(timeout=31).signature() != config.signature()
    for bad in ({"timeout": 0}, {"command_template": "openjml {flags}"}):
        try:
            VerifierConfig.from_dict(bad)
        except ConfigError as e:
            assert e.code == "ConfigInvalid"
        else:
            raise AssertionError(f"配置 {bad} 应当报错")


def test_verify_with_stub():
    logger.info("开始测试桩后端验证...")
    config = VerifierConfig()
    backend = StubBackend(
        [
            {"contains": "\\result >= a && \\result >= b", "output": POSTCONDITION, "exit_status": 1},
            {"contains": "\\result == a ||", "output": "The prover reported unknown\n", "exit_status": 0},
            {"contains": "a >= 0 && b >= 0", "output": "", "exit_status": 0, "timed_out": True},
        ],
        {"output": "", "exit_status": 0},
    )
    failure = verify(_maximum(), config, backend)
    assert failure.kind == OutcomeKind.FAILURE
    assert failure.diagnostics[0].line == 8 and failure.exit_status == 1

    unknown = verify(_maximum("\\result >= a && \\result >= b", "\\result >= a"), config, backend)
    assert unknown.kind == OutcomeKind.UNKNOWN

    requires_only = "class Maximum {\n    //@ requires a >= 0 && b >= 0;\n    int maximum(int a, int b) { return a; }\n}\n"
    timed_out = verify(_specified(requires_only, "maximum"), config, backend)
    assert timed_out.kind == OutcomeKind.UNKNOWN and timed_out.timed_out
    assert timed_out.diagnostics == ()

    plain = "class Plain {\n    //@ ensures \\result == 1;\n    int one() { return 1; }\n}\n"
    success = verify(_specified(plain, "plain"), config, backend)
    assert success.kind == OutcomeKind.SUCCESS and success.diagnostics == ()

    broken = SpecifiedProgram("class Broken {\n    int f( {\n}\n", strip_annotations(plain)[1], "broken")
    invalid = verify(broken, config, backend)
    assert invalid.kind == OutcomeKind.INVALID


def test_replay_backend():
    logger.info("开始测试回放后端...")
    config = VerifierConfig()
    program = _maximum()
    stub = StubBackend([{"contains": "maximum", "output": POSTCONDITION, "exit_status": 1}])
    with temp_dir() as directory:
        store = ReplayStore(os.path.join(directory, "replay"))
        recording = ReplayBackend(store, fallback=stub)
        first = verify(program, config, recording)
        assert program.source in store and len(store) == 1

        replaying = ReplayBackend(ReplayStore(os.path.join(directory, "replay")))
        second = verify(program, config, replaying)
        assert second.kind == first.kind == OutcomeKind.FAILURE
        assert second.raw_output == first.raw_output

        other = _maximum("a > b? a : b", "b < a? a : b")
        try:
            verify(other, config, replaying)
        except BackendUnavailable as e:
            assert e.details["key"] == ReplayStore.key(other.source)
        else:
            raise AssertionError("未录制的程序应当报错")

        assert isinstance(create_backend("replay", replay_store=store.directory), ReplayBackend)
    for kind, kwargs in (("replay", {}), ("stub", {}), ("nope", {})):
        try:
            create_backend(kind, **kwargs)
        except ConfigError:
            continue
        raise AssertionError(f"后端 {kind} 应当报错")


def test_external_backend_availability():
    """给出验证器参数时, 构造外部后端即检查可执行文件"""
    missing = VerifierConfig(command_template="jmlbench-no-such-verifier {flags} {file}")
    for kind, kwargs in (("external", {}), ("replay", {"replay_store": "unused", "record": True})):
        try:
            create_backend(kind, config=missing, **kwargs)
        except BackendUnavailable as e:
            assert e.details["executable"] == "jmlbench-no-such-verifier"
        else:
            raise AssertionError(f"{kind} 后端应当报告验证器不可用")

    present = VerifierConfig(command_template=f"{shlex.quote(sys.executable)} {{flags}} {{file}}")
    assert isinstance(create_backend("external", config=present), ExternalProcessBackend)
    # 不给参数时推迟到运行时检查
    assert isinstance(create_backend("external"), ExternalProcessBackend)


def test_result_archive():
    """相同程序与参数只调用一次后端; 超时不归档"""
    logger.info("开始测试结果归档...")
    config = VerifierConfig()
    program = _maximum()
    with temp_dir() as directory:
        archive = ResultArchive(f"sqlite:///{os.path.join(directory, 'results.sqlite')}")
        try:
            backend = CountingBackend(RawRun(POSTCONDITION, 1))
            first = verify(program, config, backend, archive)
            second = verify(program, config, backend, archive)
            assert backend.calls == 1
            assert first == second
            assert archive.count_by_kind() == {"Failure": 1}

            # 参数不同时重新验证
            verify(program, VerifierConfig(timeout=5), backend, archive)
            assert backend.calls == 2

            slow = CountingBackend(RawRun("", 0, timed_out=True))
            other = _maximum("a > b? a : b", "b < a? a : b")
            verify(other, config, slow, archive)
            verify(other, config, slow, archive)
            assert slow.calls == 2
            assert archive.count_by_kind() == {"Failure": 2}
            assert archive.get_stats()["outcomes"] == {"Failure": 2}
        finally:
            archive.close()


def test_verify_many_order():
    config = VerifierConfig()
    backend = StubBackend([{"contains": "b < a", "output": POSTCONDITION, "exit_status": 1}])
    programs = [_maximum(), _maximum("a > b? a : b", "b < a? a : b")] * 3
    outcomes = verify_many(programs, config, backend, workers=3)
    assert [o.kind for o in outcomes] == [OutcomeKind.SUCCESS, OutcomeKind.FAILURE] * 3
    try:
        verify_many(programs, config, backend, workers=0)
    except ValueError:
        pass
    else:
        raise AssertionError("workers=0 应当报错")


if __name__ == "__main__":
    sys.exit(run_module_tests(dict(globals()), logger))

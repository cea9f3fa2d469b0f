"""
提示与抽取测试 - 提示风格、修复模板、规格抽取与模型客户端
"""

import os
import sys
import logging
from test_config import DESK_CORPUS, annotate, fenced, run_module_tests, temp_dir

from core.exceptions import ConfigError, MissingDemos, ModelError
from corpus import load_corpus
from evaluation import AtomicError, FailureCategory
from generation import (
    DEFAULT_DEMONSTRATIONS,
    InvalidReason,
    PromptStyle,
    ReplayClient,
    ScriptedStubClient,
    TranscriptStore,
    build_prompt,
    build_repair_prompt,
    create_client,
    extract_repair,
    extract_specification,
    generate_many,
    generate_specification,
    load_demonstrations,
)
from verifier import Diagnostic

logger = logging.getLogger("提示与抽取测试")

SIGNATURE = "public static int maximum"
CLAUSES = ["requires a >= 0 && b >= 0;", "ensures \\result >= a && \\result >= b;"]


def _maximum():
    return load_corpus(DESK_CORPUS).get("maximum")


def _spec(record=None) -> str:
    record = record or _maximum()
    return annotate(record.bare_source, SIGNATURE, CLAUSES)


def test_generation_prompts():
    logger.info("开始测试生成提示...")
    record = _maximum()
    zero = build_prompt(PromptStyle.ZERO_SHOT, record)
    assert "### CODE" in zero.user
    assert record.bare_source.rstrip() in zero.user
    assert zero.examples_used == ()
    assert [m["role"] for m in zero.messages()] == ["system", "user"]

    for style in (PromptStyle.FEW_SHOT, PromptStyle.COT, PromptStyle.LTM):
        try:
            build_prompt(style, record)
        except MissingDemos:
            continue
        raise AssertionError(f"{style.value} 缺少示例应当报错")

    demos = load_demonstrations(DEFAULT_DEMONSTRATIONS)
    few = build_prompt("FewShot", record, demos)
    assert few.examples_used == ("demo_abs", "demo_count")
    assert "### EXAMPLE 1" in few.system and "### EXAMPLE 2" in few.system
    assert "//@" in few.system

    cot = build_prompt(PromptStyle.COT, record, demos)
    assert cot.user.endswith("\n\nLet's think step by step!")
    assert demos[0].reasoning.strip() in cot.system
    assert demos[0].reasoning.strip() not in few.system

    ltm = build_prompt(PromptStyle.LTM, record, demos)
    assert "### SPECIFICATION" in ltm.user.split("### CODE")[-1]

    try:
        build_prompt(PromptStyle.REPAIR, record)
    except ValueError:
        pass
    else:
        raise AssertionError("修复风格不能用于生成提示")


def test_repair_prompts():
    """修复提示按类别选择模板, 只包含最新规格和最新错误"""
    logger.info("开始测试修复提示...")
    extraction = extract_specification(fenced(_spec()), _maximum())
    program = extraction.program
    error = AtomicError(
        Diagnostic("/tmp/Maximum.java", 3, "assignable clauses are not allowed here"),
        FailureCategory("SyntaxError"),
    )
    bundle = build_repair_prompt(FailureCategory("SyntaxError"), program, [error])
    assert bundle.style == PromptStyle.REPAIR
    assert bundle.category == "SyntaxError"
    assert "### ERROR TYPES: Syntax Error" in bundle.user
    assert "assignable clauses are not allowed here" in bundle.user
    assert program.source.rstrip() in bundle.user
    assert "### FIXED SPECIFICATION" in bundle.user

    quantifier = build_repair_prompt(FailureCategory("UnsupportedQuantifier"), program, [])
    assert "### ERROR TYPES: Unsupported Sum/NumOf/Product Quantifier Expressions" in quantifier.user
    assert "(no message)" in quantifier.user

    generic = build_repair_prompt(FailureCategory.named("Mystery"), program, [])
    assert "### ERROR TYPES: Verification Failure" in generic.user
    assert generic.category == "Other(Mystery)"


def test_extract_specification():
    logger.info("开始测试规格抽取...")
    record = _maximum()
    spec = _spec(record)

    ok = extract_specification(fenced(spec, "Here is the annotated program:\n\n"), record)
    assert ok.ok and ok.reason is None
    assert ok.program.base_id == "maximum"
    assert ok.program.index.clause_count == 2
    assert ok.to_row("maximum")["status"] == "ok"

    cases = [
        ("I cannot annotate this program.", InvalidReason.NO_CODE_BLOCK),
        (fenced(record.bare_source), InvalidReason.NO_ANNOTATIONS),
        (fenced(spec.replace("return a > b? a : b;", "return a;")), InvalidReason.BODY_CHANGED),
        (fenced(spec.replace("return a > b? a : b;", "return a > ;")), InvalidReason.PARSE_ERROR),
    ]
    for response, reason in cases:
        extraction = extract_specification(response, record)
        assert not extraction.ok and extraction.program is None
        assert extraction.reason == reason, (reason, extraction.reason)
        assert extraction.to_row("maximum")["reason"] == reason.value


def test_extract_with_marker():
    """LTM 回复先回答问题, 规格在 ### SPECIFICATION 之后"""
    record = _maximum()
    response = (
        "1. Preconditions: both inputs are non-negative.\n\n"
        + fenced(record.bare_source)
        + "\n### SPECIFICATION\n\n"
        + fenced(_spec(record))
    )
    assert extract_specification(response, record, prefer_marker=True).ok
    assert extract_specification(response, record).reason == InvalidReason.NO_ANNOTATIONS

    fixed = annotate(record.bare_source, SIGNATURE, ["ensures \\result >= a;"])
    repair = fenced(_spec(record), "Old version:\n") + "\n### FIXED SPECIFICATION\n\n" + fenced(fixed)
    extraction = extract_repair(repair, record)
    assert extraction.ok and extraction.program.index.clause_count == 1

    # 缺少标记时使用最后一个代码块
    fallback = extract_repair(fenced(_spec(record)) + fenced(fixed), record)
    assert fallback.ok and fallback.program.source == fixed
    assert extract_repair("no code at all", record).reason == InvalidReason.NO_CODE_BLOCK


def test_scripted_client():
    logger.info("开始测试脚本桩客户端...")
    record = _maximum()
    bundle = build_prompt(PromptStyle.ZERO_SHOT, record)
    client = ScriptedStubClient({"maximum": ["first", "second"]})
    texts = [client.complete(bundle, "maximum").text for _ in range(3)]
    assert texts == ["first", "second", "second"]
    # 变体使用父记录的脚本, 调用计数独立
    assert client.complete(bundle, "maximum__ReverseIf").text == "first"
    completion = client.complete(bundle, "maximum")
    assert completion.prompt_tokens > 0 and completion.completion_tokens == 1
    assert completion.total_tokens == completion.prompt_tokens + 1

    try:
        client.complete(bundle, "ghost")
    except ModelError as e:
        assert e.details["record_id"] == "ghost"
    else:
        raise AssertionError("没有脚本的记录应当报错")
    assert ScriptedStubClient({}, default="fallback").complete(bundle, "ghost").text == "fallback"

    for kind, script in (("stub", ""), ("replay", ""), ("nope", "x")):
        try:
            create_client(kind, script=script)
        except ConfigError:
            continue
        raise AssertionError(f"客户端 {kind} 应当报错")


def test_generate_and_replay():
    """生成结果写入对话记录后可按提示回放"""
    logger.info("开始测试生成与回放...")
    corpus = load_corpus(DESK_CORPUS)
    record = corpus.get("maximum")
    client = ScriptedStubClient({"maximum": [fenced(_spec(record))]}, default="no idea")

    result = generate_specification(record, PromptStyle.ZERO_SHOT, client)
    assert result.extraction.ok
    assert result.extraction.program.base_id == "maximum"
    assert result.transcript()[0]["extraction"]["status"] == "ok"

    results = generate_many(list(corpus), PromptStyle.ZERO_SHOT, client, workers=3)
    assert [r.record_id for r in results] == [r.id for r in corpus]
    assert [r.extraction.ok for r in results] == [r.id == "maximum" for r in corpus]
    try:
        generate_many(list(corpus), PromptStyle.ZERO_SHOT, client, workers=0)
    except ValueError:
        pass
    else:
        raise AssertionError("workers=0 应当报错")

    with temp_dir() as directory:
        store = TranscriptStore(os.path.join(directory, "transcripts"))
        for item in results:
            store.save(item.record_id, item.transcript())
        assert store.record_ids() == sorted(r.id for r in corpus)
        assert store.load("ghost") == []

        replay = create_client("replay", script=store.directory)
        assert isinstance(replay, ReplayClient)
        replayed = generate_specification(record, PromptStyle.ZERO_SHOT, replay)
        assert replayed.completion.text == result.completion.text
        assert replayed.extraction.ok

        demos = load_demonstrations(DEFAULT_DEMONSTRATIONS)
        try:
            generate_specification(record, PromptStyle.FEW_SHOT, replay, demos)
        except ModelError:
            pass
        else:
            raise AssertionError("未录制的提示应当报错")


if __name__ == "__main__":
    sys.exit(run_module_tests(dict(globals()), logger))

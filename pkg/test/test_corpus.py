"""
语料加载测试 - 清单解析、控制流分类、严格/宽松校验
"""

import os
import sys
import json
import logging
from test_config import DESK_CORPUS, read_program, run_module_tests, temp_dir

from core.exceptions import CorpusError, DuplicateId, MissingManifest, ParseFailure
from corpus import (
    ControlFlowClass,
    Corpus,
    Origin,
    ProgramRecord,
    classify_control_flow,
    load_corpus,
    save_corpus,
    validate_record,
)

logger = logging.getLogger("语料加载测试")


def _method(body: str) -> str:
    return "class C {\n    int f(int n, int[] a) {\n" + body + "\n    }\n}\n"


def _write_corpus(directory, entries, sources):
    os.makedirs(os.path.join(directory, "sources"), exist_ok=True)
    for name, text in sources.items():
        with open(os.path.join(directory, "sources", name), "w", encoding="utf-8") as f:
            f.write(text)
    with open(os.path.join(directory, "manifest.json"), "w", encoding="utf-8") as f:
        json.dump(entries, f)


def test_classify_control_flow():
    logger.info("开始测试控制流分类...")
    cases = {
        ControlFlowClass.SEQUENTIAL: "        return n + 1;",
        ControlFlowClass.BRANCHING: "        if (n > 0) { return 1; }\n        return 0;",
        ControlFlowClass.SINGLE_PATH_LOOP: "        int s = 0;\n        while (n > 0) { s += n; n--; }\n        return s;",
        ControlFlowClass.MULTI_PATH_LOOP: "        for (int i = 0; i < n; i++) { if (a[i] == 0) { return i; } }\n        return -1;",
        ControlFlowClass.NESTED_LOOP: "        int s = 0;\n        for (int i = 0; i < n; i++) { for (int j = 0; j < i; j++) { s++; } }\n        return s;",
    }
    for expected, body in cases.items():
        assert classify_control_flow(_method(body)) == expected, expected
    # 条件表达式不算分支
    assert classify_control_flow(_method("        return n > 0 ? n : -n;")) == ControlFlowClass.SEQUENTIAL
    early_exit = "        for (int i = 0; i < n; i++) { if (a[i] < 0) break; }\n        return 0;"
    assert classify_control_flow(_method(early_exit)) == ControlFlowClass.MULTI_PATH_LOOP
    assert ControlFlowClass.NESTED_LOOP.rank > ControlFlowClass.MULTI_PATH_LOOP.rank
    assert ControlFlowClass.SINGLE_PATH_LOOP.is_loop and not ControlFlowClass.BRANCHING.is_loop


def test_load_desk_corpus():
    logger.info("开始测试加载语料...")
    corpus = load_corpus(DESK_CORPUS)
    assert len(corpus) == 5
    assert corpus.name == "desk"
    assert [r.id for r in corpus] == [
        "maximum",
        "count_charac",
        "ascii_value",
        "max_achievable",
        "swap_array",
    ]
    assert corpus.class_counts() == {
        "Sequential": 2,
        "Branching": 2,
        "SinglePathLoop": 1,
        "MultiPathLoop": 0,
        "NestedLoop": 0,
    }
    record = corpus.get("max_achievable")
    assert record.cfc == ControlFlowClass.SINGLE_PATH_LOOP
    assert record.origin.is_base and record.parent_id == "max_achievable"
    assert "maximum" in corpus and "missing" not in corpus


def test_save_and_reload():
    logger.info("开始测试保存语料...")
    corpus = load_corpus(DESK_CORPUS)
    variant = ProgramRecord(
        id="maximum__SwitchRelation",
        bare_source=corpus.get("maximum").bare_source.replace("a > b", "b < a"),
        intent=corpus.get("maximum").intent,
        cfc=ControlFlowClass.SEQUENTIAL,
        origin=Origin.transformed("maximum", "SwitchRelation"),
    )
    with temp_dir() as directory:
        save_corpus(Corpus([variant], name="desk-diverse"), directory, parents=["maximum"])
        reloaded = load_corpus(directory)
        assert len(reloaded) == 1
        loaded = reloaded.get("maximum__SwitchRelation")
        assert loaded.bare_source == variant.bare_source
        assert str(loaded.origin) == "transformed:maximum:SwitchRelation"
        assert loaded.parent_id == "maximum"
        assert reloaded.groups() == {"maximum": [loaded]}


def test_origin_with_colon_in_parent():
    """父 id 含冒号时来源仍能解析回原值"""
    origin = Origin.transformed("desk:maximum", "ReverseIf")
    assert str(origin) == "transformed:desk:maximum:ReverseIf"
    parsed = Origin.parse(str(origin))
    assert parsed == origin
    assert parsed.parent_id == "desk:maximum" and parsed.transform_id == "ReverseIf"
    assert Origin.parse("base").is_base and Origin.parse("").is_base


def test_missing_manifest():
    with temp_dir() as directory:
        try:
            load_corpus(directory)
        except MissingManifest as e:
            assert e.code == "MissingManifest"
        else:
            raise AssertionError("缺少清单应当报错")


def test_duplicate_id():
    logger.info("开始测试重复 id...")
    source = read_program("Loop.java")
    entries = [
        {"id": "dup", "source_path": "sources/Loop.java", "intent": ""},
        {"id": "dup", "source_path": "sources/Loop.java", "intent": ""},
    ]
    with temp_dir() as directory:
        _write_corpus(directory, entries, {"Loop.java": source})
        try:
            load_corpus(directory)
        except DuplicateId as e:
            assert e.record_id == "dup"
        else:
            raise AssertionError("重复 id 应当报错")


def test_strict_and_lenient():
    """严格模式报错, 宽松模式跳过无效记录"""
    logger.info("开始测试严格/宽松模式...")
    sources = {
        "Loop.java": read_program("Loop.java"),
        "Broken.java": "class Broken {\n    int f( {\n}\n",
        "Annotated.java": read_program("MaxAchievable.java"),
    }
    entries = [
        {"id": "loop", "source_path": "sources/Loop.java", "intent": "sum"},
        {"id": "broken", "source_path": "sources/Broken.java", "intent": ""},
    ]
    with temp_dir() as directory:
        _write_corpus(directory, entries, sources)
        try:
            load_corpus(directory, strict=True)
        except ParseFailure as e:
            assert e.record_id == "broken"
        else:
            raise AssertionError("严格模式应当报解析错误")
        assert [r.id for r in load_corpus(directory, strict=False)] == ["loop"]

    entries = [
        {"id": "loop", "source_path": "sources/Loop.java", "intent": "sum"},
        {"id": "annotated", "source_path": "sources/Annotated.java", "intent": ""},
        {"id": "orphan", "source_path": "sources/Loop.java", "intent": "", "origin": "transformed:ghost:For2While"},
    ]
    with temp_dir() as directory:
        _write_corpus(directory, entries, sources)
        try:
            load_corpus(directory, strict=True)
        except CorpusError as e:
            assert e.details["record_id"] == "annotated"
        else:
            raise AssertionError("带注解的记录应当报错")
        assert [r.id for r in load_corpus(directory, strict=False)] == ["loop"]


def test_validate_record():
    record = ProgramRecord(
        id="v",
        bare_source=read_program("Loop.java"),
        intent="",
        cfc=ControlFlowClass.SINGLE_PATH_LOOP,
        origin=Origin.transformed("loop", "NoSuchTransform"),
    )
    kinds = [v.kind for v in validate_record(record, known_ids={"loop"})]
    assert kinds == ["UnknownTransform"]
    kinds = [v.kind for v in validate_record(record, known_ids=set())]
    assert kinds == ["DanglingParent", "UnknownTransform"]


if __name__ == "__main__":
    sys.exit(run_module_tests(dict(globals()), logger))

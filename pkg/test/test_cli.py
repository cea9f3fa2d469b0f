"""
命令行端到端测试 - 用桩模型与桩验证器在小语料上跑完整流水线
"""

import os
import sys
import csv
import json
import subprocess
import logging
from test_config import DESK_CORPUS, PROJECT_ROOT, annotate, fenced, run_module_tests, temp_dir

from core.config import load_run_config
from core.exceptions import ConfigError
from core.utils import SafeFileHandler
from corpus import load_corpus

logger = logging.getLogger("命令行端到端测试")

MAIN = os.path.join(PROJECT_ROOT, "main.py")


def _postcondition(name: str, method: str) -> str:
    return (
        f"/tmp/{name}.java:4: verify: The prover cannot establish an assertion "
        f"(Postcondition: /tmp/{name}.java:2:) in method {method}\n1 verification failure\n"
    )


STUB_RULES = {
    "rules": [
        # 杀死 Maximum 的一个变异体
        {"contains": "a < b?", "output": _postcondition("Maximum", "maximum"), "exit_status": 1},
        {"contains": "\\result >= 1000", "output": _postcondition("AsciiValue", "asciiValue"), "exit_status": 1},
        {"contains": "\\result == newArray", "output": "The prover reported unknown\n", "exit_status": 0},
    ],
    "default": {"output": "", "exit_status": 0},
}


def _model_script() -> dict:
    corpus = load_corpus(DESK_CORPUS)

    def spec(record_id, before, *clauses):
        return annotate(corpus.get(record_id).bare_source, before, clauses)

    def fixed(source):
        return "### FIXED SPECIFICATION\n\n" + fenced(source)

    return {
        "responses": {
            "maximum": [
                fenced(spec("maximum", "public static int maximum", "requires a >= 0 && b >= 0;",
                            "ensures \\result >= a && \\result >= b;"))
            ],
            "count_charac": [
                fenced(spec("count_charac", "public static int countCharac", "ensures \\result == str1.length();"))
            ],
            "ascii_value": [
                fenced(spec("ascii_value", "public static int asciiValue", "ensures \\result >= 1000;")),
                fixed(spec("ascii_value", "public static int asciiValue", "ensures \\result >= -1;")),
            ],
            "max_achievable": [
                "I could not produce a specification for this program.",
                fixed(spec("max_achievable", "public int theMaximumAchievableX",
                           "requires t >= 0 && t <= 1000;", "ensures \\result == num + 2 * t;")),
            ],
            "swap_array": [
                fenced(spec("swap_array", "public static int[] swapEnds", "ensures \\result == newArray;"))
            ],
        }
    }


def _setup(directory: str) -> str:
    """写出桩规则、模型脚本和配置文件, 返回配置文件路径"""
    rules = os.path.join(directory, "stub_rules.json")
    script = os.path.join(directory, "model_script.json")
    SafeFileHandler.write_json(rules, STUB_RULES)
    SafeFileHandler.write_json(script, _model_script())
    config = os.path.join(directory, "run.json")
    SafeFileHandler.write_json(
        config,
        {
            "corpus_path": DESK_CORPUS,
            "output_dir": os.path.join(directory, "out"),
            "verifier_backend": "stub",
            "stub_rules": rules,
            "model_backend": "stub",
            "model_script": script,
            "concurrency": 2,
        },
    )
    return config


def _run(directory: str, *args: str) -> subprocess.CompletedProcess:
    env = dict(os.environ)
    env["JMLBENCH_LOG_FILE"] = os.path.join(directory, "jmlbench.log")
    result = subprocess.run(
        [sys.executable, MAIN, *args],
        cwd=directory,
        env=env,
        capture_output=True,
        text=True,
        encoding="utf-8",
    )
    if result.returncode != 0:
        logger.info(f"{' '.join(args)} -> {result.returncode}: {result.stderr.strip()[-500:]}")
    return result


def _rows(path: str):
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.reader(f))


def _read(path: str) -> bytes:
    with open(path, "rb") as f:
        return f.read()


def test_full_pipeline():
    logger.info("开始测试完整流水线...")
    with temp_dir() as directory:
        config = _setup(directory)
        out = os.path.join(directory, "out")
        for command in (["ingest"], ["transform"], ["mutate"], ["generate"], ["verify"], ["score"], ["triage"]):
            result = _run(directory, *command, "--config", config)
            assert result.returncode == 0, (command, result.stderr)

        assert os.path.isfile(os.path.join(out, "ingest", "corpus", "manifest.json"))
        for stage in ("ingest", "transform", "mutate", "generate", "verify", "score", "triage"):
            assert os.path.isfile(os.path.join(out, stage, "provenance.json")), stage
            assert os.path.isfile(os.path.join(out, stage, "timestamps.json")), stage

        applicability = _rows(os.path.join(out, "transform", "applicability.csv"))
        assert len(applicability[0]) == 19 and len(applicability) == 6

        with open(os.path.join(out, "generate", "extraction.csv"), encoding="utf-8", newline="") as f:
            extraction = {row["record_id"]: row for row in csv.DictReader(f)}
        assert extraction["max_achievable"]["reason"] == "NoCodeBlock"
        assert sorted(os.listdir(os.path.join(out, "generate", "specs"))) == [
            "ascii_value.java",
            "count_charac.java",
            "maximum.java",
            "swap_array.java",
        ]

        outcomes = SafeFileHandler.read_jsonl(os.path.join(out, "verify", "outcomes.jsonl"))
        assert [(row["record_id"], row["kind"]) for row in outcomes] == [
            ("maximum", "Success"),
            ("count_charac", "Success"),
            ("ascii_value", "Failure"),
            ("max_achievable", "Invalid"),
            ("swap_array", "Unknown"),
        ]
        completeness = SafeFileHandler.read_jsonl(os.path.join(out, "verify", "completeness.jsonl"))
        assert len(completeness) == 6 and {row["spec_id"] for row in completeness} == {"maximum"}
        assert sum(row["kind"] != "Success" for row in completeness) == 1

        metrics = SafeFileHandler.read_json(os.path.join(out, "score", "metrics.json"))
        assert metrics["label"] == "model/ZeroShot"
        assert metrics["sr"]["exact"] == "2/5" and metrics["fr"]["exact"] == "2/5"
        assert metrics["cr"]["exact"] == "1/6"
        metric_rows = {row[0]: row[2] for row in _rows(os.path.join(out, "score", "metrics.csv"))[1:]}
        assert (metric_rows["sr"], metric_rows["fr"], metric_rows["cr"]) == ("40.0", "40.0", "16.7")
        assert metric_rows["flr"] == "-"

        distribution = _rows(os.path.join(out, "triage", "distribution.csv"))
        assert distribution[1:] == [["InvalidSpecification", "1", "50.0"], ["PostconditionFailure", "1", "50.0"]]

        result = _run(directory, "repair", "--config", config, "--max-iters", "2")
        assert result.returncode == 0, result.stderr
        summary = SafeFileHandler.read_json(os.path.join(out, "repair", "summary.json"))
        assert summary["attempted"] == 3
        assert summary["repaired"] == 2
        assert summary["by_iteration"] == {"2": 2}
        assert summary["by_terminal"]["Exhausted"] == 1
        trace = SafeFileHandler.read_json(os.path.join(out, "repair", "traces", "ascii_value.json"))
        assert trace["iterations"][0]["dominant"] == "PostconditionFailure"
        assert trace["iterations"][1]["prompt"]["category"] == "PostconditionFailure"

        result = _run(directory, "report", "--config", config)
        assert result.returncode == 0, result.stderr
        effectiveness = _rows(os.path.join(out, "report", "effectiveness.csv"))
        assert effectiveness[1:] == [
            ["model/ZeroShot", "40.0", "40.0", "16.7"],
            ["model/ZeroShot+repair", "80.0", "0.0", "16.7"],
        ]
        failures = _rows(os.path.join(out, "report", "failures.csv"))
        assert [row[0] for row in failures[1:]] == ["InvalidSpecification", "PostconditionFailure"]
        assert os.path.isfile(os.path.join(out, "report", "summary.txt"))


def test_rerun_is_deterministic():
    """相同输入重跑, 除时间戳外产物逐字节相同"""
    logger.info("开始测试重跑一致性...")
    with temp_dir() as directory:
        config = _setup(directory)
        out = os.path.join(directory, "out")
        assert _run(directory, "ingest", "--config", config).returncode == 0
        artifacts = [
            ("mutate", "mutants.csv"),
            ("mutate", "provenance.json"),
            ("transform", "applicability.csv"),
            ("transform", "naturalness.csv"),
            ("transform", os.path.join("diverse", "manifest.json")),
        ]
        for stage in ("mutate", "transform"):
            assert _run(directory, stage, "--config", config).returncode == 0
        first = {path: _read(os.path.join(out, *path)) for path in artifacts}
        for stage in ("mutate", "transform"):
            assert _run(directory, stage, "--config", config).returncode == 0
        for path, data in first.items():
            assert _read(os.path.join(out, *path)) == data, path


def test_stage_errors():
    logger.info("开始测试阶段错误...")
    with temp_dir() as directory:
        config = _setup(directory)
        out = os.path.join(directory, "out")
        assert _run(directory, "ingest", "--config", config).returncode == 0

        # 缺少上游产物
        result = _run(directory, "score", "--config", config)
        assert result.returncode == 3
        record = SafeFileHandler.read_json(os.path.join(out, "score", "error.json"))
        assert record["error"] == "StageFailure" and record["stage"] == "verify"

        # 空的结果日志
        SafeFileHandler.atomic_write(os.path.join(out, "verify", "outcomes.jsonl"), "")
        result = _run(directory, "score", "--config", config)
        assert result.returncode == 3
        record = SafeFileHandler.read_json(os.path.join(out, "score", "error.json"))
        assert record["error"] == "EmptyLog"
        assert json.loads(result.stderr.strip().splitlines()[-1])["error"] == "EmptyLog"

        # 非法配置
        result = _run(directory, "ingest", "--config", config, "--workers", "0", "--output", out)
        assert result.returncode == 2
        record = SafeFileHandler.read_json(os.path.join(out, "ingest", "error.json"))
        assert record["error"] == "ConfigInvalid" and record["field"] == "concurrency"


def test_run_config_errors():
    with temp_dir() as directory:
        path = os.path.join(directory, "bad.json")
        for content, field in (
            ({"corpus_path": DESK_CORPUS, "colour": "red"}, "colour"),
            ({"verifier": {"timeout": 0}}, "verifier.timeout"),
            ({"keep_ratio": 1.5}, "keep_ratio"),
            ({"stub_rules": os.path.join(directory, "missing.json")}, "stub_rules"),
        ):
            SafeFileHandler.write_json(path, content)
            try:
                load_run_config(path)
            except ConfigError as e:
                assert e.details["field"] == field, (field, e.details)
            else:
                raise AssertionError(f"{field} 应当报错")

        SafeFileHandler.write_json(path, {"corpus_path": DESK_CORPUS, "verifier": {"timeout": 30}})
        config = load_run_config(path, {"concurrency": 3, "prompt_style": None})
        assert config.concurrency == 3 and config.prompt_style == "ZeroShot"
        assert config.verifier["timeout"] == 30
        assert "{file}" in config.verifier["command_template"]


if __name__ == "__main__":
    sys.exit(run_module_tests(dict(globals()), logger))

"""
主程序 - JML 规格推断评测框架命令行入口
"""

import os
import sys
import json
import logging
import argparse
from logging.handlers import RotatingFileHandler

from core.config import LOG_CONFIG, RunConfig, load_run_config
from core.exceptions import ConfigError, HarnessError
from core.harness import SpecHarness
from core.utils import SafeFileHandler

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STAGE = 3


# 设置日志系统
def setup_logging(level: str = LOG_CONFIG["level"], log_file: str = LOG_CONFIG["log_file"]):
    """配置日志系统: 滚动文件 + 标准输出"""
    root = logging.getLogger()
    root.setLevel(getattr(logging, level.upper(), logging.INFO))
    for handler in list(root.handlers):
        root.removeHandler(handler)
    formatter = logging.Formatter(LOG_CONFIG["log_format"])
    handlers = [logging.StreamHandler(sys.stdout)]
    if log_file:
        directory = os.path.dirname(os.path.abspath(log_file))
        os.makedirs(directory, exist_ok=True)
        handlers.append(
            RotatingFileHandler(
                log_file,
                maxBytes=LOG_CONFIG["max_size"],
                backupCount=LOG_CONFIG["backup_count"],
                encoding="utf-8",
            )
        )
    for handler in handlers:
        handler.setFormatter(formatter)
        root.addHandler(handler)


# 全局日志对象
logger = logging.getLogger(__name__)


def parse_args(argv=None):
    """解析命令行参数"""
    parser = argparse.ArgumentParser(description="JML 规格推断评测框架")

    # 所有子命令共用的参数
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="JSON 配置文件, 覆盖默认值")
    common.add_argument("--output", type=str, help="输出目录 (覆盖配置中的 output_dir)")
    common.add_argument("--workers", type=int, help="并发上限 (覆盖配置中的 concurrency)")
    common.add_argument(
        "--log-level",
        type=str,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="日志级别",
    )

    subparsers = parser.add_subparsers(dest="command", required=True)

    ingest = subparsers.add_parser("ingest", parents=[common], help="加载并校验基准语料")
    ingest.add_argument("--corpus", type=str, help="语料目录 (含 manifest.json)")
    ingest.add_argument("--lenient", action="store_true", help="宽松模式: 跳过无效记录")

    transform = subparsers.add_parser("transform", parents=[common], help="构建 Diverse / Diverse-N 变体语料")
    transform.add_argument("--transforms", type=str, help="变换名列表, 以逗号分隔")

    mutate = subparsers.add_parser("mutate", parents=[common], help="生成变异体")
    mutate.add_argument("--operators", type=str, help="变异算子列表, 以逗号分隔")

    generate = subparsers.add_parser("generate", parents=[common], help="调用模型生成规格")
    generate.add_argument(
        "--style", type=str, choices=["ZeroShot", "FewShot", "CoT", "LTM"], help="提示风格"
    )
    generate.add_argument("--targets", type=str, help="目标语料: base,diverse,diverse_n")
    generate.add_argument("--model-backend", type=str, choices=["openai", "stub", "replay"])
    generate.add_argument("--model-script", type=str, help="桩脚本文件或回放记录目录")

    verify = subparsers.add_parser("verify", parents=[common], help="验证生成的规格")
    verify.add_argument("--verifier-backend", type=str, choices=["external", "replay", "stub"])
    verify.add_argument("--replay-store", type=str, help="回放库目录")

    subparsers.add_parser("score", parents=[common], help="计算指标")

    triage = subparsers.add_parser("triage", parents=[common], help="失败分诊")
    triage.add_argument("--top-k", type=int, help="分布表保留的类别数")

    repair = subparsers.add_parser("repair", parents=[common], help="自修复循环")
    repair.add_argument("--max-iters", type=int, help="最大修复轮数")
    repair.add_argument("--mutation-fallback", action="store_true", help="启用规格变异修复兜底")

    subparsers.add_parser("report", parents=[common], help="渲染报告")

    return parser.parse_args(argv)


def _split(value):
    return [v.strip() for v in value.split(",") if v.strip()] if value else None


def build_overrides(args) -> dict:
    """命令行参数 -> 配置覆盖项 (值为 None 的项不覆盖)"""
    overrides = {
        "output_dir": args.output,
        "concurrency": args.workers,
    }
    if args.command == "ingest":
        overrides["corpus_path"] = args.corpus
        overrides["lenient"] = True if args.lenient else None
    elif args.command == "transform":
        overrides["transforms"] = _split(args.transforms)
    elif args.command == "mutate":
        overrides["operators"] = _split(args.operators)
    elif args.command == "generate":
        overrides["prompt_style"] = args.style
        overrides["targets"] = _split(args.targets)
        overrides["model_backend"] = args.model_backend
        overrides["model_script"] = args.model_script
    elif args.command == "verify":
        overrides["verifier_backend"] = args.verifier_backend
        overrides["replay_store"] = args.replay_store
    elif args.command == "triage":
        overrides["top_k"] = args.top_k
    elif args.command == "repair":
        overrides["max_repair_iters"] = args.max_iters
        overrides["mutation_fallback"] = True if args.mutation_fallback else None
    return overrides


def write_error(output_dir: str, stage: str, record: dict) -> None:
    """写出机器可读的错误记录并打印到标准错误"""
    text = json.dumps(record, ensure_ascii=False, sort_keys=True)
    try:
        SafeFileHandler.write_json(os.path.join(output_dir, stage, "error.json"), record)
    except OSError as e:
        logger.error(f"Cannot write error record: {e}")
    print(text, file=sys.stderr)


def handle_ingest(harness: SpecHarness) -> int:
    corpus = harness.ingest()
    print(f"Ingested {len(corpus)} records: {corpus.class_counts()}")
    return EXIT_OK


def handle_transform(harness: SpecHarness) -> int:
    diverse, diverse_n = harness.transform()
    print(f"Diverse: {len(diverse)} variants, Diverse-N: {len(diverse_n)} variants")
    return EXIT_OK


def handle_mutate(harness: SpecHarness) -> int:
    kept = harness.mutate()
    print(f"Generated {kept} non-equivalent mutants")
    return EXIT_OK


def handle_generate(harness: SpecHarness) -> int:
    valid = harness.generate()
    print(f"Extracted {valid} specifications")
    return EXIT_OK


def handle_verify(harness: SpecHarness) -> int:
    logs = harness.verify()
    for target, log in logs.items():
        counts = {}
        for kind in log.kinds():
            counts[kind.value] = counts.get(kind.value, 0) + 1
        print(f"{target}: {counts}")
    return EXIT_OK


def handle_score(harness: SpecHarness) -> int:
    report = harness.score()
    print(json.dumps(report.to_dict(), indent=2, ensure_ascii=False))
    return EXIT_OK


def handle_triage(harness: SpecHarness) -> int:
    ranked = harness.triage()
    for category, count in ranked:
        print(f"{category}: {count}")
    return EXIT_OK


def handle_repair(harness: SpecHarness) -> int:
    traces = harness.repair()
    for trace in traces:
        print(f"{trace.record_id}: {trace.terminal.value} after {len(trace.iterations)} iterations")
    return EXIT_OK


def handle_report(harness: SpecHarness) -> int:
    rendered = harness.report()
    for name, text in rendered.items():
        print(f"== {name} ==\n{text}")
    return EXIT_OK


HANDLERS = {
    "ingest": handle_ingest,
    "transform": handle_transform,
    "mutate": handle_mutate,
    "generate": handle_generate,
    "verify": handle_verify,
    "score": handle_score,
    "triage": handle_triage,
    "repair": handle_repair,
    "report": handle_report,
}


def main(argv=None) -> int:
    """主函数"""
    args = parse_args(argv)
    setup_logging(args.log_level or LOG_CONFIG["level"])

    overrides = build_overrides(args)
    output_dir = args.output or RunConfig.output_dir
    try:
        config = load_run_config(args.config, overrides)
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e.message}")
        write_error(output_dir, args.command, e.to_record())
        return EXIT_CONFIG

    harness = SpecHarness(config)
    try:
        return HANDLERS[args.command](harness)
    except ConfigError as e:
        write_error(harness.output_dir, args.command, e.to_record())
        return EXIT_CONFIG
    except HarnessError as e:
        write_error(harness.output_dir, args.command, e.to_record())
        return EXIT_STAGE
    except Exception as e:
        logger.exception("Unhandled exception")
        write_error(
            harness.output_dir,
            args.command,
            {"error": "StageFailure", "message": str(e), "type": type(e).__name__},
        )
        return EXIT_STAGE
    finally:
        harness.close()


if __name__ == "__main__":
    sys.exit(main())

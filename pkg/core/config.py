"""
项目配置文件

默认配置以大写字典给出, 每项都支持 JMLBENCH_* 环境变量覆盖;
运行级配置 (RunConfig) 由默认值、--config JSON 文件和命令行参数依次合并得到。
"""

import os
import json
import copy
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, List, Optional

from .exceptions import ConfigError

# 写入每个阶段来源记录的版本号
HARNESS_VERSION = "0.1.0"

# 语料配置
CORPUS_CONFIG = {
    "manifest_file": "manifest.json",
    "sources_dir": "sources",
    "strict": os.environ.get("JMLBENCH_CORPUS_STRICT", "1") != "0",  # 严格模式: 校验失败即拒绝
}

# 验证器配置 (默认对应 OpenJML esc 模式 + CVC4)
VERIFIER_CONFIG = {
    "command_template": os.environ.get(
        "JMLBENCH_VERIFIER_COMMAND", "openjml {flags} {file}"
    ),
    "mode": "esc",
    "solver": os.environ.get("JMLBENCH_VERIFIER_SOLVER", "cvc4"),
    "timeout": float(os.environ.get("JMLBENCH_VERIFIER_TIMEOUT", "300")),  # 秒
    "nullable_by_default": True,
    "arithmetic_mode": True,
    # 验证器"无法判定"的输出标记, 可扩展
    "inconclusive_markers": [
        "The prover reported unknown",
        "Prover could not determine",
        "timed out",
        "Timeout",
    ],
}

# 模型配置
MODEL_CONFIG = {
    "model_id": os.environ.get("JMLBENCH_MODEL", "gpt-4o"),
    "temperature": float(os.environ.get("JMLBENCH_TEMPERATURE", "0.7")),
    "max_tokens": int(os.environ.get("JMLBENCH_MAX_TOKENS", "2048")),
    "api_key_env": "OPENAI_API_KEY",  # 凭据只通过环境变量引用
    "base_url": os.environ.get("JMLBENCH_MODEL_BASE_URL", ""),
    "requests_per_minute": int(os.environ.get("JMLBENCH_RPM", "60")),
    "max_retries": 3,
    "extra_options": {},  # 透传给 API 的不透明选项, 例如 reasoning_effort
}

# 变换配置
TRANSFORM_CONFIG = {
    "ngram_order": 3,
    "keep_ratio": 0.5,  # Diverse-N 保留自然度较好的一半
    "min_variants": 3,  # 父程序至少保留 3 个变体
    "transforms": [],  # 空列表表示全部 18 种
}

# 变异配置
MUTATION_CONFIG = {
    "operators": [
        "RelationalOpReplace",
        "ArithmeticOpReplace",
        "LogicalConnectorReplace",
        "UnaryInsert",
        "LiteralReplace",
        "StatementDelete",
    ],
}

# 修复配置
REPAIR_CONFIG = {
    "max_iters": int(os.environ.get("JMLBENCH_REPAIR_ITERS", "3")),
    "mutation_fallback": False,
    "mutation_budget": 10,
}

# 日志配置
LOG_CONFIG = {
    "log_file": os.environ.get("JMLBENCH_LOG_FILE", "jmlbench.log"),
    "level": os.environ.get("JMLBENCH_LOG_LEVEL", "INFO"),
    "max_size": 10 * 1024 * 1024,  # 最大日志文件大小 (10MB)
    "backup_count": 5,  # 保留的日志文件数量
    "log_format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
}

# 性能配置
PERFORMANCE_CONFIG = {
    "cache_size": int(os.environ.get("JMLBENCH_CACHE_SIZE", "1000")),  # 缓存项数量
    "compression_level": int(
        os.environ.get("JMLBENCH_COMPRESSION_LEVEL", "9")
    ),  # zstd压缩级别
    "parallel_threads": int(os.environ.get("JMLBENCH_THREADS", "4")),  # 并行线程数
}

# 验证结果归档库
DATABASE_CONFIG = {
    "url": os.environ.get("JMLBENCH_DATABASE_URL", ""),  # 为空时使用 <output>/results.sqlite
    "enabled": os.environ.get("JMLBENCH_ARCHIVE", "1") != "0",
}


@dataclass
class RunConfig:
    """一次流水线运行的完整配置"""

    corpus_path: str = ""
    output_dir: str = "runs/default"
    model_label: str = "model"
    prompt_style: str = "ZeroShot"
    targets: List[str] = field(default_factory=lambda: ["base"])
    demos_path: str = ""
    pattern_table: str = ""
    concurrency: int = PERFORMANCE_CONFIG["parallel_threads"]
    seed: int = 0  # 预留, 目前没有随机决策
    lenient: bool = not CORPUS_CONFIG["strict"]
    # 验证器后端: external | replay | stub
    verifier_backend: str = "external"
    replay_store: str = ""
    stub_rules: str = ""
    verifier: Dict[str, Any] = field(default_factory=lambda: copy.deepcopy(VERIFIER_CONFIG))
    # 模型后端: openai | stub | replay
    model_backend: str = "openai"
    model_script: str = ""
    model: Dict[str, Any] = field(default_factory=lambda: copy.deepcopy(MODEL_CONFIG))
    transforms: List[str] = field(default_factory=lambda: list(TRANSFORM_CONFIG["transforms"]))
    keep_ratio: float = TRANSFORM_CONFIG["keep_ratio"]
    min_variants: int = TRANSFORM_CONFIG["min_variants"]
    ngram_order: int = TRANSFORM_CONFIG["ngram_order"]
    operators: List[str] = field(default_factory=lambda: list(MUTATION_CONFIG["operators"]))
    max_repair_iters: int = REPAIR_CONFIG["max_iters"]
    mutation_fallback: bool = REPAIR_CONFIG["mutation_fallback"]
    mutation_budget: int = REPAIR_CONFIG["mutation_budget"]
    cr_over_all: bool = False  # 默认只在基础验证成功的规格上统计 CR
    top_k: int = 10
    database_url: str = DATABASE_CONFIG["url"]
    archive_enabled: bool = DATABASE_CONFIG["enabled"]

    def validate(self) -> None:
        """
        校验配置不变量

        Raises:
            ConfigError: 任一不变量不成立
        """
        timeout = self.verifier.get("timeout", 0)
        if not isinstance(timeout, (int, float)) or timeout <= 0:
            raise ConfigError("verifier timeout must be > 0", field="verifier.timeout")
        if "{file}" not in str(self.verifier.get("command_template", "")):
            raise ConfigError(
                "verifier command_template must contain {file}",
                field="verifier.command_template",
            )
        if float(self.model.get("temperature", 0)) < 0:
            raise ConfigError("temperature must be >= 0", field="model.temperature")
        if int(self.model.get("max_tokens", 0)) <= 0:
            raise ConfigError("max_tokens must be > 0", field="model.max_tokens")
        if self.concurrency < 1:
            raise ConfigError("concurrency must be >= 1", field="concurrency")
        if self.max_repair_iters < 1:
            raise ConfigError("max_repair_iters must be >= 1", field="max_repair_iters")
        if not 0 < self.keep_ratio <= 1:
            raise ConfigError("keep_ratio must be in (0, 1]", field="keep_ratio")
        if self.verifier_backend not in ("external", "replay", "stub"):
            raise ConfigError(
                f"unknown verifier backend: {self.verifier_backend}",
                field="verifier_backend",
            )
        if self.model_backend not in ("openai", "stub", "replay"):
            raise ConfigError(
                f"unknown model backend: {self.model_backend}", field="model_backend"
            )
        for name in ("corpus_path", "demos_path", "pattern_table", "stub_rules", "model_script"):
            path = getattr(self, name)
            if path and not os.path.exists(path):
                raise ConfigError(f"referenced path does not exist: {path}", field=name)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def config_hash(self) -> str:
        """配置的规范化 JSON 哈希, 用于来源记录"""
        from .utils import hash_data

        canonical = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)
        return hash_data(canonical)


def _merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_run_config(
    path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None
) -> RunConfig:
    """
    加载运行配置

    Args:
        path: --config 指定的 JSON 文件, 可为空
        overrides: 命令行参数覆盖项 (值为 None 的项被忽略)

    Returns:
        校验通过的 RunConfig

    Raises:
        ConfigError: 文件不可读、格式错误、存在未知字段或不变量不成立
    """
    values = RunConfig().to_dict()

    if path:
        try:
            with open(path, "r", encoding="utf-8") as f:
                file_values = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config file {path}: {e}", field="config")
        if not isinstance(file_values, dict):
            raise ConfigError("config file must contain a JSON object", field="config")
        values = _merge(values, file_values)

    if overrides:
        values = _merge(values, {k: v for k, v in overrides.items() if v is not None})

    known = set(RunConfig.__dataclass_fields__)
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"unknown config fields: {', '.join(unknown)}", field=unknown[0])

    config = RunConfig(**values)
    config.validate()
    return config

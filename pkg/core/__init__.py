"""
jmlbench core - JML 规格推断评测框架的公共基础

此项目评测大模型为 Java 程序生成 JML 规格的能力。
主要功能包括:
- 基准语料加载与控制流分类
- 语义保持变换与自然度筛选
- 变异体生成 (完备性代理指标)
- 外部验证器调度与结果归档
- 指标计算、失败分诊与报告
- 规格生成与按失败类别引导的自修复

主要模块:
- core: 配置、异常、工具函数和流水线编排 (core.harness)
- corpus / astcore / transforms / mutation: 语料与程序改写
- verifier / database: 验证与结果归档
- evaluation / generation: 指标、分诊、报告与模型交互
"""

# 导入工具类
from .utils import (
    LRUCache,
    DataCompressor,
    timing_decorator,
    retry_decorator,
    hash_data,
    hash_file,
    hash_tree,
    SafeFileHandler,
    ProgressTracker,
)

# 导入配置
from .config import (
    HARNESS_VERSION,
    CORPUS_CONFIG,
    VERIFIER_CONFIG,
    MODEL_CONFIG,
    TRANSFORM_CONFIG,
    MUTATION_CONFIG,
    REPAIR_CONFIG,
    LOG_CONFIG,
    PERFORMANCE_CONFIG,
    DATABASE_CONFIG,
    RunConfig,
    load_run_config,
)
from .exceptions import HarnessError, ConfigError, StageError

# 版本信息
__version__ = HARNESS_VERSION

__all__ = [
    # 工具类
    "LRUCache",
    "DataCompressor",
    "timing_decorator",
    "retry_decorator",
    "hash_data",
    "hash_file",
    "hash_tree",
    "SafeFileHandler",
    "ProgressTracker",
    # 配置
    "HARNESS_VERSION",
    "CORPUS_CONFIG",
    "VERIFIER_CONFIG",
    "MODEL_CONFIG",
    "TRANSFORM_CONFIG",
    "MUTATION_CONFIG",
    "REPAIR_CONFIG",
    "LOG_CONFIG",
    "PERFORMANCE_CONFIG",
    "DATABASE_CONFIG",
    "RunConfig",
    "load_run_config",
    # 异常
    "HarnessError",
    "ConfigError",
    "StageError",
]

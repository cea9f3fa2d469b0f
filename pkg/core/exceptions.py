"""
异常定义模块

所有流水线阶段抛出的异常都继承自 HarnessError, 每个异常携带一个稳定的
错误码, 并可以转换为机器可读的错误记录 (命令行失败时写入 error.json)。
"""

from typing import Any, Dict, Optional


class HarnessError(Exception):
    """评测框架异常基类"""

    code = "HarnessError"

    def __init__(self, message: str = "", **details: Any):
        super().__init__(message or self.code)
        self.message = message or self.code
        self.details = details

    def to_record(self) -> Dict[str, Any]:
        """
        转换为机器可读的错误记录

        Returns:
            包含错误码、消息和附加字段的字典
        """
        record: Dict[str, Any] = {"error": self.code, "message": self.message}
        for key, value in sorted(self.details.items()):
            record[key] = value
        return record


class ConfigError(HarnessError):
    """配置无效 (命令行退出码 2)"""

    code = "ConfigInvalid"


class StageError(HarnessError):
    """上游阶段产物缺失或阶段执行失败"""

    code = "StageFailure"


# 语料相关
class CorpusError(HarnessError):
    code = "CorpusError"


class MissingManifest(CorpusError):
    code = "MissingManifest"


class DuplicateId(CorpusError):
    code = "DuplicateId"

    def __init__(self, record_id: str):
        super().__init__(f"duplicate record id: {record_id}", record_id=record_id)
        self.record_id = record_id


class ParseFailure(HarnessError):
    """源码无法解析"""

    code = "ParseFailure"

    def __init__(
        self,
        position: int,
        message: str,
        record_id: Optional[str] = None,
        line: Optional[int] = None,
    ):
        details: Dict[str, Any] = {"position": position}
        if record_id is not None:
            details["record_id"] = record_id
        if line is not None:
            details["line"] = line
        super().__init__(message, **details)
        self.position = position
        self.record_id = record_id
        self.line = line

    def with_record(self, record_id: str) -> "ParseFailure":
        """返回附带记录 id 的副本"""
        return ParseFailure(self.position, self.message, record_id, self.line)


# 语法树与改写
class AnchorMissing(HarnessError):
    code = "AnchorMissing"


class RewriteConflict(HarnessError):
    code = "RewriteConflict"


class ScorerFailure(HarnessError):
    code = "ScorerFailure"


# 验证器
class BackendUnavailable(HarnessError):
    code = "BackendUnavailable"


# 指标
class MetricError(HarnessError):
    code = "MetricError"


class EmptyLog(MetricError):
    code = "EmptyLog"


class NoMutants(MetricError):
    code = "NoMutants"


class BaseNotSuccess(MetricError):
    code = "BaseNotSuccess"


class NoVariants(MetricError):
    code = "NoVariants"


class EmptyGroup(MetricError):
    code = "EmptyGroup"


class UnknownId(MetricError):
    code = "UnknownId"

    def __init__(self, record_id: str):
        super().__init__(f"record id not in corpus: {record_id}", record_id=record_id)
        self.record_id = record_id


# 生成与修复
class MissingDemos(HarnessError):
    code = "MissingDemos"


class ModelError(HarnessError):
    """模型客户端调用失败"""

    code = "ModelError"

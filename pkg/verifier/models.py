"""
验证器数据模型
"""

import json
import shlex
import copy
from dataclasses import dataclass, field, asdict
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from core.config import VERIFIER_CONFIG
from core.exceptions import ConfigError


class OutcomeKind(str, Enum):
    """一次验证运行的结果类别, 四类互斥"""

    SUCCESS = "Success"
    FAILURE = "Failure"
    UNKNOWN = "Unknown"
    INVALID = "Invalid"


@dataclass(frozen=True)
class Diagnostic:
    """
    验证器报告的一条诊断

    file 为空表示无法归属到源文件位置的输出行, 此时 line 为 None
    """

    file: str
    line: Optional[int]
    raw_message: str
    kind: str = "verify"
    context: Tuple[str, ...] = ()
    anchor: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        if not self.raw_message:
            raise ValueError("diagnostic message must be non-empty")
        if self.file and (self.line is None or self.line < 1):
            raise ValueError(f"diagnostic line must be >= 1, got {self.line}")

    @property
    def is_obligation(self) -> bool:
        """是否是带位置的证明义务记录"""
        return bool(self.file)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["context"] = list(self.context)
        data["anchor"] = list(self.anchor) if self.anchor else None
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Diagnostic":
        anchor = data.get("anchor")
        return cls(
            file=data.get("file", ""),
            line=data.get("line"),
            raw_message=data["raw_message"],
            kind=data.get("kind", "verify"),
            context=tuple(data.get("context", ())),
            anchor=tuple(anchor) if anchor else None,
        )


@dataclass(frozen=True)
class VerificationOutcome:
    """
    归一化后的验证结果

    不变量: Success 没有诊断, Failure 至少有一条证明义务诊断
    """

    kind: OutcomeKind
    diagnostics: Tuple[Diagnostic, ...] = ()
    wall_time: float = 0.0
    raw_output: str = ""
    exit_status: Optional[int] = None
    timed_out: bool = False

    def __post_init__(self):
        if self.kind == OutcomeKind.SUCCESS and self.diagnostics:
            raise ValueError("a successful outcome carries no diagnostics")
        if self.kind == OutcomeKind.FAILURE and not any(d.is_obligation for d in self.diagnostics):
            raise ValueError("a failed outcome needs at least one proof-obligation diagnostic")

    @classmethod
    def invalid(cls, reason: str) -> "VerificationOutcome":
        """规格无法解析, 从未提交给验证器"""
        return cls(OutcomeKind.INVALID, raw_output=reason)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "diagnostics": [d.to_dict() for d in self.diagnostics],
            "wall_time": self.wall_time,
            "raw_output": self.raw_output,
            "exit_status": self.exit_status,
            "timed_out": self.timed_out,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "VerificationOutcome":
        return cls(
            kind=OutcomeKind(data["kind"]),
            diagnostics=tuple(Diagnostic.from_dict(d) for d in data.get("diagnostics", [])),
            wall_time=float(data.get("wall_time", 0.0)),
            raw_output=data.get("raw_output", ""),
            exit_status=data.get("exit_status"),
            timed_out=bool(data.get("timed_out", False)),
        )


@dataclass(frozen=True)
class RawRun:
    """后端返回的原始运行结果"""

    output: str
    exit_status: int
    timed_out: bool = False
    wall_time: float = 0.0


@dataclass
class VerifierConfig:
    """验证器调用参数, 默认值见 core.config.VERIFIER_CONFIG"""

    command_template: str = VERIFIER_CONFIG["command_template"]
    mode: str = VERIFIER_CONFIG["mode"]
    solver: str = VERIFIER_CONFIG["solver"]
    timeout: float = VERIFIER_CONFIG["timeout"]
    nullable_by_default: bool = VERIFIER_CONFIG["nullable_by_default"]
    arithmetic_mode: bool = VERIFIER_CONFIG["arithmetic_mode"]
    inconclusive_markers: List[str] = field(
        default_factory=lambda: list(VERIFIER_CONFIG["inconclusive_markers"])
    )
    extra_flags: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """
        Raises:
            ConfigError: timeout 不为正或命令模板缺少 {file}
        """
        if not isinstance(self.timeout, (int, float)) or self.timeout <= 0:
            raise ConfigError("verifier timeout must be > 0", field="verifier.timeout")
        if "{file}" not in self.command_template:
            raise ConfigError(
                "verifier command_template must contain {file}",
                field="verifier.command_template",
            )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "VerifierConfig":
        values = copy.deepcopy(VERIFIER_CONFIG)
        values.update(data or {})
        known = set(cls.__dataclass_fields__)
        return cls(**{k: v for k, v in values.items() if k in known})

    def flags(self) -> List[str]:
        """OpenJML 命令行选项"""
        flags = [f"--{self.mode}", f"--prover={self.solver}"]
        if self.nullable_by_default:
            flags.append("--nullable-by-default")
        if self.arithmetic_mode:
            flags.append("--code-math=safe")
        return flags + list(self.extra_flags)

    def command(self, path: str) -> List[str]:
        """展开命令模板, 返回参数列表"""
        text = self.command_template.format(
            flags=" ".join(shlex.quote(f) for f in self.flags()),
            file=shlex.quote(path),
            solver=self.solver,
            timeout=int(self.timeout),
        )
        return shlex.split(text)

    def signature(self) -> str:
        """影响验证结果的参数的规范串, 参与结果缓存键"""
        data = asdict(self)
        data.pop("inconclusive_markers")
        return json.dumps(data, sort_keys=True)

"""
验证器后端

- ExternalProcessBackend: 调用外部 OpenJML 进程
- ReplayBackend: 按程序内容哈希回放录制好的输出
- StubBackend: 按子串规则返回固定输出, 用于测试
"""

import os
import re
import time
import shutil
import logging
import tempfile
import subprocess
import threading
from typing import Any, Dict, List, Optional

from typing_extensions import Protocol

from core.config import PERFORMANCE_CONFIG
from core.exceptions import BackendUnavailable, ConfigError
from core.utils import DataCompressor, SafeFileHandler, ensure_directory, hash_data
from .models import RawRun, VerifierConfig

logger = logging.getLogger(__name__)

_CLASS_RE = re.compile(r"^\s*(?:public\s+)?(?:final\s+|abstract\s+)*class\s+(\w+)", re.MULTILINE)


class VerifierBackend(Protocol):
    name: str

    def run(self, source: str, config: VerifierConfig) -> RawRun: ...


def class_name_of(source: str) -> str:
    """源文件名必须与顶层类同名; public 类优先"""
    public = re.search(r"^\s*public\s+(?:final\s+|abstract\s+)*class\s+(\w+)", source, re.MULTILINE)
    if public:
        return public.group(1)
    match = _CLASS_RE.search(source)
    return match.group(1) if match else "Main"


class ExternalProcessBackend:
    """在临时目录中写出 <类名>.java 并调用外部验证器"""

    name = "external"

    def __init__(self, executable: Optional[str] = None):
        self.executable = executable

    def check_available(self, config: VerifierConfig) -> None:
        """
        Raises:
            BackendUnavailable: 找不到验证器可执行文件
        """
        program = self.executable or config.command("X.java")[0]
        if shutil.which(program) is None:
            raise BackendUnavailable(f"verifier executable not found: {program}", executable=program)

    def run(self, source: str, config: VerifierConfig) -> RawRun:
        with tempfile.TemporaryDirectory(prefix="jmlbench_") as workdir:
            path = os.path.join(workdir, f"{class_name_of(source)}.java")
            with open(path, "w", encoding="utf-8") as f:
                f.write(source)
            command = config.command(path)
            if self.executable:
                command[0] = self.executable
            logger.debug(f"Running verifier: {' '.join(command)}")
            start = time.perf_counter()
            try:
                completed = subprocess.run(
                    command,
                    stdout=subprocess.PIPE,
                    stderr=subprocess.STDOUT,
                    timeout=config.timeout,
                    cwd=workdir,
                )
            except FileNotFoundError as e:
                raise BackendUnavailable(
                    f"verifier executable not found: {command[0]}", executable=command[0]
                ) from e
            except subprocess.TimeoutExpired as e:
                elapsed = time.perf_counter() - start
                output = (e.output or b"").decode("utf-8", errors="replace")
                logger.warning(f"Verifier timed out after {elapsed:.1f}s on {os.path.basename(path)}")
                return RawRun(output, -1, timed_out=True, wall_time=elapsed)
            elapsed = time.perf_counter() - start
            output = completed.stdout.decode("utf-8", errors="replace")
            return RawRun(output, completed.returncode, wall_time=elapsed)


class ReplayStore:
    """
    回放库: 目录下每个程序一条 <hash>.json.zst 记录

    记录字段: output, exit_status, timed_out, wall_time
    """

    SUFFIX = ".json.zst"

    def __init__(self, directory: str):
        self.directory = directory
        self.compressor = DataCompressor(PERFORMANCE_CONFIG["compression_level"])
        self._lock = threading.Lock()

    @staticmethod
    def key(source: str) -> str:
        return hash_data(source)

    def _path(self, source: str) -> str:
        return os.path.join(self.directory, self.key(source) + self.SUFFIX)

    def __contains__(self, source: str) -> bool:
        return os.path.exists(self._path(source))

    def __len__(self) -> int:
        if not os.path.isdir(self.directory):
            return 0
        return sum(1 for name in os.listdir(self.directory) if name.endswith(self.SUFFIX))

    def record(self, source: str, run: RawRun) -> str:
        """
        录制一次运行

        Returns:
            记录的键
        """
        ensure_directory(self.directory)
        entry = {
            "output": run.output,
            "exit_status": run.exit_status,
            "timed_out": run.timed_out,
            "wall_time": run.wall_time,
        }
        with self._lock:
            self.compressor.save_json(entry, self._path(source))
        return self.key(source)

    def lookup(self, source: str) -> Optional[RawRun]:
        path = self._path(source)
        if not os.path.exists(path):
            return None
        entry = self.compressor.load_json(path)
        return RawRun(
            entry["output"],
            int(entry["exit_status"]),
            timed_out=bool(entry.get("timed_out", False)),
            wall_time=float(entry.get("wall_time", 0.0)),
        )


class ReplayBackend:
    """
    从 ReplayStore 回放输出

    未录制的程序交给 fallback 后端运行并录制; 没有 fallback 时抛出 BackendUnavailable
    """

    name = "replay"

    def __init__(self, store: ReplayStore, fallback: Optional[VerifierBackend] = None):
        self.store = store
        self.fallback = fallback

    def run(self, source: str, config: VerifierConfig) -> RawRun:
        run = self.store.lookup(source)
        if run is not None:
            return run
        if self.fallback is None:
            raise BackendUnavailable(
                f"no recorded output for program {ReplayStore.key(source)}",
                key=ReplayStore.key(source),
                store=self.store.directory,
            )
        run = self.fallback.run(source, config)
        self.store.record(source, run)
        return run


class StubBackend:
    """
    规则桩: 程序源码包含规则的 contains 子串时返回该规则的输出, 规则按顺序匹配

    规则文件格式::

        {"rules": [{"contains": "...", "output": "...", "exit_status": 1}],
         "default": {"output": "", "exit_status": 0}}
    """

    name = "stub"

    def __init__(self, rules: List[Dict[str, Any]], default: Optional[Dict[str, Any]] = None):
        self.rules = list(rules)
        self.default = default or {"output": "", "exit_status": 0}

    @classmethod
    def from_file(cls, path: str) -> "StubBackend":
        data = SafeFileHandler.read_json(path)
        if not isinstance(data, dict) or not isinstance(data.get("rules", []), list):
            raise ConfigError(f"invalid stub rules file: {path}", field="stub_rules")
        return cls(data.get("rules", []), data.get("default"))

    def run(self, source: str, config: VerifierConfig) -> RawRun:
        chosen = self.default
        for rule in self.rules:
            if rule.get("contains", "") in source:
                chosen = rule
                break
        return RawRun(
            chosen.get("output", ""),
            int(chosen.get("exit_status", 0)),
            timed_out=bool(chosen.get("timed_out", False)),
            wall_time=float(chosen.get("wall_time", 0.0)),
        )


def _external(config: Optional[VerifierConfig]) -> ExternalProcessBackend:
    backend = ExternalProcessBackend()
    if config is not None:
        backend.check_available(config)
    return backend


def create_backend(
    kind: str,
    replay_store: str = "",
    stub_rules: str = "",
    record: bool = False,
    config: Optional[VerifierConfig] = None,
) -> VerifierBackend:
    """
    按名字构造后端

    Args:
        kind: external | replay | stub
        replay_store: 回放库目录
        stub_rules: 桩规则文件
        record: replay 模式下未命中时是否调用外部验证器并录制
        config: 给出时立即检查外部验证器是否可用

    Raises:
        ConfigError: 名字未知或缺少必要路径
        BackendUnavailable: 需要外部验证器但找不到可执行文件
    """
    if kind == "external":
        return _external(config)
    if kind == "replay":
        if not replay_store:
            raise ConfigError("replay backend needs replay_store", field="replay_store")
        fallback = _external(config) if record else None
        return ReplayBackend(ReplayStore(replay_store), fallback)
    if kind == "stub":
        if not stub_rules:
            raise ConfigError("stub backend needs stub_rules", field="stub_rules")
        return StubBackend.from_file(stub_rules)
    raise ConfigError(f"unknown verifier backend: {kind}", field="verifier_backend")

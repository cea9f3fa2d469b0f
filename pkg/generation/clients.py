"""
模型客户端

统一的聊天接口 (system + user 消息 -> 文本), 三种后端:
- OpenAIChatClient: OpenAI 兼容的 HTTP 接口
- ScriptedStubClient: 按记录 id 返回预先写好的回复, 用于可复现的离线运行
- ReplayClient: 按提示内容哈希回放之前运行录制的对话记录
"""

import os
import time
import logging
import threading
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

from openai import OpenAI, OpenAIError
from typing_extensions import Protocol

from core.config import MODEL_CONFIG
from core.exceptions import ConfigError, ModelError
from core.utils import DataCompressor, SafeFileHandler, hash_data, retry_decorator
from .prompts import PromptBundle

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Completion:
    text: str
    prompt_tokens: int = 0
    completion_tokens: int = 0
    model: str = ""

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens


class ModelClient(Protocol):
    name: str

    def complete(self, bundle: PromptBundle, record_id: str) -> Completion: ...


def prompt_key(bundle: PromptBundle) -> str:
    return hash_data(bundle.system + "\0" + bundle.user)


class RateLimiter:
    """按每分钟请求数限速 (线程安全)"""

    def __init__(self, requests_per_minute: int):
        self.interval = 60.0 / requests_per_minute if requests_per_minute > 0 else 0.0
        self._next = 0.0
        self._lock = threading.Lock()

    def wait(self) -> None:
        if self.interval <= 0:
            return
        with self._lock:
            now = time.monotonic()
            delay = self._next - now
            self._next = max(now, self._next) + self.interval
        if delay > 0:
            time.sleep(delay)


class OpenAIChatClient:
    """OpenAI 兼容的聊天补全客户端, 凭据只从环境变量读取"""

    name = "openai"

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        self.config = dict(MODEL_CONFIG)
        self.config.update(config or {})
        if float(self.config["temperature"]) < 0:
            raise ConfigError("temperature must be >= 0", field="model.temperature")
        if int(self.config["max_tokens"]) <= 0:
            raise ConfigError("max_tokens must be > 0", field="model.max_tokens")
        self.limiter = RateLimiter(int(self.config.get("requests_per_minute", 0)))
        self._client = None
        self._lock = threading.Lock()

    def _get_client(self):
        with self._lock:
            if self._client is None:
                key_env = self.config["api_key_env"]
                api_key = os.environ.get(key_env)
                if not api_key:
                    raise ConfigError(f"environment variable {key_env} is not set", field="model.api_key_env")
                self._client = OpenAI(api_key=api_key, base_url=self.config.get("base_url") or None)
            return self._client

    def _create(self, bundle: PromptBundle):
        self.limiter.wait()
        return self._get_client().chat.completions.create(
            model=self.config["model_id"],
            messages=bundle.messages(),
            temperature=float(self.config["temperature"]),
            max_tokens=int(self.config["max_tokens"]),
            **dict(self.config.get("extra_options") or {}),
        )

    def complete(self, bundle: PromptBundle, record_id: str) -> Completion:
        call = retry_decorator(
            max_retries=int(self.config.get("max_retries", 3)), exceptions=(OpenAIError,)
        )(self._create)
        try:
            response = call(bundle)
        except OpenAIError as e:
            logger.error(f"Model call for {record_id} failed: {e}")
            raise ModelError(f"model call failed: {e}", record_id=record_id) from e
        text = response.choices[0].message.content or ""
        usage = getattr(response, "usage", None)
        return Completion(
            text=text,
            prompt_tokens=getattr(usage, "prompt_tokens", 0) or 0,
            completion_tokens=getattr(usage, "completion_tokens", 0) or 0,
            model=getattr(response, "model", self.config["model_id"]),
        )


def _approx_tokens(text: str) -> int:
    return len(text.split())


class ScriptedStubClient:
    """
    脚本桩: 每个记录 id 对应一个回复列表, 第 n 次调用返回第 n 个回复 (用完后重复最后一个)

    变体记录 (id 形如 parent__Transform) 没有自己的脚本时使用父记录的脚本。
    脚本文件格式: {"responses": {"<id>": ["...", "..."]}, "default": "..."}
    """

    name = "stub"

    def __init__(self, responses: Dict[str, List[str]], default: Optional[str] = None):
        self.responses = {k: list(v) for k, v in responses.items()}
        self.default = default
        self.calls: Dict[str, int] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str) -> "ScriptedStubClient":
        data = SafeFileHandler.read_json(path)
        if not isinstance(data, dict) or not isinstance(data.get("responses", {}), dict):
            raise ConfigError(f"invalid model script: {path}", field="model_script")
        return cls(data.get("responses", {}), data.get("default"))

    def _script_for(self, record_id: str) -> Optional[List[str]]:
        if record_id in self.responses:
            return self.responses[record_id]
        parent = record_id.split("__", 1)[0]
        return self.responses.get(parent)

    def complete(self, bundle: PromptBundle, record_id: str) -> Completion:
        with self._lock:
            index = self.calls.get(record_id, 0)
            self.calls[record_id] = index + 1
        script = self._script_for(record_id)
        if script:
            text = script[min(index, len(script) - 1)]
        elif self.default is not None:
            text = self.default
        else:
            raise ModelError(f"no scripted response for {record_id}", record_id=record_id)
        return Completion(text, _approx_tokens(bundle.system + " " + bundle.user), _approx_tokens(text), "stub")


class TranscriptStore:
    """
    对话记录: 每个记录一个 <id>.json.zst, 内容为调用列表
    (prompt, response, tokens)
    """

    SUFFIX = ".json.zst"

    def __init__(self, directory: str):
        self.directory = directory
        self.compressor = DataCompressor()

    def path(self, record_id: str) -> str:
        return os.path.join(self.directory, f"{record_id}{self.SUFFIX}")

    def save(self, record_id: str, calls: List[Dict[str, Any]]) -> None:
        self.compressor.save_json(calls, self.path(record_id))

    def load(self, record_id: str) -> List[Dict[str, Any]]:
        path = self.path(record_id)
        if not os.path.exists(path):
            return []
        return self.compressor.load_json(path)

    def record_ids(self) -> List[str]:
        if not os.path.isdir(self.directory):
            return []
        return sorted(
            name[: -len(self.SUFFIX)] for name in os.listdir(self.directory) if name.endswith(self.SUFFIX)
        )


def transcript_entry(bundle: PromptBundle, completion: Completion, **extra: Any) -> Dict[str, Any]:
    entry = {
        "prompt": bundle.to_dict(),
        "prompt_key": prompt_key(bundle),
        "response": completion.text,
        "prompt_tokens": completion.prompt_tokens,
        "completion_tokens": completion.completion_tokens,
        "model": completion.model,
    }
    entry.update(extra)
    return entry


class ReplayClient:
    """按提示哈希回放录制的回复"""

    name = "replay"

    def __init__(self, store: TranscriptStore):
        self.responses: Dict[str, Dict[str, Any]] = {}
        for record_id in store.record_ids():
            for call in store.load(record_id):
                self.responses.setdefault(call["prompt_key"], call)
        logger.info(f"Loaded {len(self.responses)} recorded model responses from {store.directory}")

    def complete(self, bundle: PromptBundle, record_id: str) -> Completion:
        call = self.responses.get(prompt_key(bundle))
        if call is None:
            raise ModelError(f"no recorded response for prompt of {record_id}", record_id=record_id)
        return Completion(
            call["response"],
            int(call.get("prompt_tokens", 0)),
            int(call.get("completion_tokens", 0)),
            call.get("model", "replay"),
        )


def create_client(kind: str, model_config: Optional[Dict[str, Any]] = None, script: str = "") -> ModelClient:
    """
    按名字构造模型客户端

    Raises:
        ConfigError: 名字未知或缺少脚本/记录目录
    """
    if kind == "openai":
        return OpenAIChatClient(model_config)
    if kind == "stub":
        if not script:
            raise ConfigError("stub model backend needs model_script", field="model_script")
        return ScriptedStubClient.from_file(script)
    if kind == "replay":
        if not script:
            raise ConfigError("replay model backend needs model_script (transcript directory)", field="model_script")
        return ReplayClient(TranscriptStore(script))
    raise ConfigError(f"unknown model backend: {kind}", field="model_backend")

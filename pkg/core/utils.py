"""
工具函数模块
"""

import logging
import time
import os
import sys
import json
import threading
from functools import wraps
from typing import Callable, Any, Dict, Iterable, List, TypeVar, Generic, Optional, Union, Tuple
from collections import OrderedDict

import xxhash
import zstandard as zstd

# 配置日志
logger = logging.getLogger(__name__)

# 泛型类型变量定义
K = TypeVar("K")  # 键类型
V = TypeVar("V")  # 值类型


def timing_decorator(func: Callable) -> Callable:
    """
    计时装饰器, 用于测量阶段函数的执行时间

    Args:
        func: 要计时的函数

    Returns:
        包装后的函数
    """

    @wraps(func)
    def wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        try:
            return func(*args, **kwargs)
        finally:
            elapsed = time.perf_counter() - start_time
            logger.info(f"{func.__name__} completed in {elapsed:.3f} seconds")

    return wrapper


def retry_decorator(
    max_retries: int = 3,
    delay: float = 1.0,
    backoff_factor: float = 2.0,
    exceptions: tuple = (Exception,),
) -> Callable:
    """
    重试装饰器, 用于模型接口等可能瞬时失败的调用

    Args:
        max_retries: 最大尝试次数
        delay: 初始延迟时间 (秒)
        backoff_factor: 退避因子, 每次重试后延迟时间乘以该因子
        exceptions: 触发重试的异常类型

    Returns:
        装饰器函数
    """

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            wait = delay
            for attempt in range(1, max_retries + 1):
                try:
                    return func(*args, **kwargs)
                except exceptions as e:
                    if attempt == max_retries:
                        raise
                    logger.warning(
                        f"Function {func.__name__} failed with {str(e)}. "
                        f"Retrying in {wait:.2f} seconds... ({attempt}/{max_retries})"
                    )
                    time.sleep(wait)
                    wait *= backoff_factor

        return wrapper

    return decorator


class LRUCache(Generic[K, V]):
    """
    线程安全的 LRU 缓存

    验证结果归档在数据库之前用它做内存层缓存
    """

    def __init__(self, capacity: int = 1000):
        self.capacity = capacity
        self.cache: "OrderedDict[K, V]" = OrderedDict()
        self.hits = 0
        self.misses = 0
        self._lock = threading.RLock()

    def get(self, key: K) -> Optional[V]:
        with self._lock:
            if key in self.cache:
                self.cache.move_to_end(key)
                self.hits += 1
                return self.cache[key]
            self.misses += 1
            return None

    def put(self, key: K, value: V) -> None:
        with self._lock:
            if key in self.cache:
                self.cache.move_to_end(key)
            elif len(self.cache) >= self.capacity:
                self.cache.popitem(last=False)
            self.cache[key] = value

    def clear(self) -> None:
        """清空缓存"""
        with self._lock:
            self.cache.clear()
            self.hits = 0
            self.misses = 0

    def get_stats(self) -> Dict[str, Any]:
        """
        获取缓存统计信息

        Returns:
            包含命中率、命中次数和未命中次数的字典
        """
        with self._lock:
            total = self.hits + self.misses
            return {
                "size": len(self.cache),
                "capacity": self.capacity,
                "hits": self.hits,
                "misses": self.misses,
                "hit_rate": self.hits / total if total > 0 else 0,
            }

    def __len__(self) -> int:
        return len(self.cache)

    def __contains__(self, key: K) -> bool:
        return key in self.cache


class DataCompressor:
    """zstd 压缩工具, 用于回放库条目和模型对话记录"""

    def __init__(self, level: int = 9):
        """
        Args:
            level: 压缩级别, 1-22, 默认9
        """
        self.compressor = zstd.ZstdCompressor(level=level)
        self.decompressor = zstd.ZstdDecompressor()

    def compress_json(self, data: Any) -> bytes:
        """序列化为规范 JSON 后压缩"""
        text = json.dumps(data, sort_keys=True, ensure_ascii=False)
        return self.compressor.compress(text.encode("utf-8"))

    def decompress_json(self, compressed_data: bytes) -> Any:
        return json.loads(self.decompressor.decompress(compressed_data).decode("utf-8"))

    def save_json(self, data: Any, filename: str) -> None:
        """
        压缩并原子写入 JSON 数据

        Args:
            data: 可 JSON 序列化的数据
            filename: 目标文件
        """
        SafeFileHandler.atomic_write(filename, self.compress_json(data), "wb")

    def load_json(self, filename: str) -> Any:
        with open(filename, "rb") as f:
            return self.decompress_json(f.read())


def hash_data(data: Union[str, bytes]) -> str:
    """
    计算内容哈希 (xxh64)

    Args:
        data: 文本或字节

    Returns:
        十六进制哈希字符串
    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    return xxhash.xxh64(data).hexdigest()


def hash_file(filepath: str, chunk_size: int = 8192) -> str:
    """
    计算文件的哈希值

    Args:
        filepath: 文件路径
        chunk_size: 读取块大小

    Returns:
        文件的哈希值
    """
    hasher = xxhash.xxh64()
    with open(filepath, "rb") as f:
        for chunk in iter(lambda: f.read(chunk_size), b""):
            hasher.update(chunk)
    return hasher.hexdigest()


def hash_tree(directory: str) -> Dict[str, str]:
    """
    计算目录下所有文件的哈希 (相对路径 -> 哈希), 用于阶段来源记录

    Args:
        directory: 目录路径

    Returns:
        按相对路径排序的哈希字典
    """
    hashes: Dict[str, str] = {}
    for root, _, files in os.walk(directory):
        for name in files:
            path = os.path.join(root, name)
            rel = os.path.relpath(path, directory).replace(os.sep, "/")
            hashes[rel] = hash_file(path)
    return dict(sorted(hashes.items()))


def ensure_directory(directory: str) -> None:
    """
    确保目录存在, 如果不存在则创建

    Args:
        directory: 目录路径
    """
    if directory and not os.path.exists(directory):
        os.makedirs(directory, exist_ok=True)
        logger.debug(f"Created directory: {directory}")


def read_source(path: str) -> str:
    """读取 UTF-8 源文件, 行尾统一为 \\n"""
    with open(path, "r", encoding="utf-8", newline="") as f:
        return f.read().replace("\r\n", "\n").replace("\r", "\n")


class SafeFileHandler:
    """安全文件处理类, 所有产物都通过原子写入落盘"""

    @staticmethod
    def atomic_write(filepath: str, data: Union[str, bytes], mode: str = "w") -> None:
        """
        原子方式写入文件 (先写入临时文件, 再重命名)

        Args:
            filepath: 目标文件路径
            data: 要写入的数据
            mode: 写入模式 ('w' 为文本, 'wb' 为二进制)
        """
        ensure_directory(os.path.dirname(filepath))
        temp_path = f"{filepath}.tmp"

        try:
            if "b" in mode:
                with open(temp_path, mode) as f:
                    f.write(data)
                    f.flush()
                    os.fsync(f.fileno())
            else:
                with open(temp_path, mode, encoding="utf-8", newline="\n") as f:
                    f.write(data)
                    f.flush()
                    os.fsync(f.fileno())
            os.replace(temp_path, filepath)
        except Exception:
            if os.path.exists(temp_path):
                os.unlink(temp_path)
            raise

    @staticmethod
    def read_json(filepath: str, default: Any = None) -> Any:
        """
        安全读取JSON文件

        Args:
            filepath: 文件路径
            default: 文件不存在或格式错误时返回的默认值

        Returns:
            解析后的JSON数据或默认值
        """
        try:
            if os.path.exists(filepath):
                with open(filepath, "r", encoding="utf-8") as f:
                    return json.load(f)
            return default
        except (json.JSONDecodeError, IOError) as e:
            logger.error(f"Error reading JSON file {filepath}: {str(e)}")
            return default

    @staticmethod
    def write_json(filepath: str, data: Any, pretty: bool = True) -> None:
        """
        写入规范化 JSON (键排序, 便于字节级比较)

        Args:
            filepath: 文件路径
            data: 要写入的数据
            pretty: 是否美化输出
        """
        indent = 2 if pretty else None
        text = json.dumps(data, indent=indent, ensure_ascii=False, sort_keys=True)
        SafeFileHandler.atomic_write(filepath, text + "\n", "w")

    @staticmethod
    def write_jsonl(filepath: str, rows: Iterable[Dict[str, Any]]) -> None:
        """每行一条 JSON 记录"""
        lines = [json.dumps(row, ensure_ascii=False, sort_keys=True) for row in rows]
        SafeFileHandler.atomic_write(filepath, "".join(line + "\n" for line in lines), "w")

    @staticmethod
    def read_jsonl(filepath: str) -> List[Dict[str, Any]]:
        rows = []
        with open(filepath, "r", encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if line:
                    rows.append(json.loads(line))
        return rows


class ProgressTracker:
    """进度跟踪器, 用于长时间运行的验证和生成循环"""

    def __init__(
        self, total: int, description: str = "Processing", update_interval: float = 0.5
    ):
        """
        Args:
            total: 总项数
            description: 操作描述
            update_interval: 日志更新间隔 (秒)
        """
        self.total = total
        self.description = description
        self.update_interval = update_interval
        self.current = 0
        self.start_time: Optional[float] = None
        self.last_update = 0.0
        self._lock = threading.Lock()

    def start(self) -> None:
        """开始跟踪进度"""
        self.start_time = time.time()
        self.last_update = self.start_time
        logger.info(f"Started {self.description}: 0/{self.total}")

    def update(self, increment: int = 1, force: bool = False) -> None:
        """
        更新进度 (可被多个工作线程调用)

        Args:
            increment: 增量
            force: 是否强制输出日志
        """
        with self._lock:
            self.current += increment
            now = time.time()
            if self.start_time is None:
                self.start_time = now
            if force or now - self.last_update >= self.update_interval:
                percent = (self.current / self.total) * 100 if self.total > 0 else 0
                logger.info(
                    f"{self.description}: {self.current}/{self.total} "
                    f"({percent:.1f}%), {now - self.start_time:.1f}s elapsed"
                )
                self.last_update = now

    def finish(self) -> Tuple[float, float]:
        """
        完成进度跟踪

        Returns:
            元组 (总耗时, 每秒处理项数)
        """
        if not self.start_time:
            return 0, 0

        total_time = time.time() - self.start_time
        items_per_sec = self.current / total_time if total_time > 0 else 0
        logger.info(
            f"Completed {self.description}: {self.current}/{self.total} items "
            f"in {total_time:.2f}s ({items_per_sec:.2f} items/s)"
        )
        return total_time, items_per_sec


def exception_handler(exc_type, exc_value, exc_traceback):
    """处理未捕获的异常"""
    if issubclass(exc_type, KeyboardInterrupt):
        sys.__excepthook__(exc_type, exc_value, exc_traceback)
        return

    logger.critical("Uncaught exception", exc_info=(exc_type, exc_value, exc_traceback))


# 设置异常处理钩子
sys.excepthook = exception_handler

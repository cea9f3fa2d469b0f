"""
验证结果归档操作
"""

import logging
import threading
from typing import Any, Dict, Optional

from sqlalchemy import create_engine, func
from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.orm import sessionmaker
from sqlalchemy_utils import create_database, database_exists

from core.config import PERFORMANCE_CONFIG
from core.utils import DataCompressor, LRUCache, hash_data
from .models import ArchivedOutcome, OutcomePayload, init_db

logger = logging.getLogger(__name__)


class ResultArchive:
    """
    验证结果归档, 内存 LRU 缓存在前, 数据库在后

    同一程序在同一后端和参数下的结果只验证一次; 超时结果由调用方负责不写入
    """

    def __init__(self, connection_string: str, cache_size: int = PERFORMANCE_CONFIG["cache_size"]):
        """
        Args:
            connection_string: 数据库连接字符串, 例如 sqlite:///runs/x/results.sqlite
            cache_size: 内存缓存项数
        """
        try:
            self.engine = create_engine(connection_string)
            if not database_exists(self.engine.url):
                create_database(self.engine.url)
            init_db(self.engine)
            self.Session = sessionmaker(bind=self.engine)
            self.cache = LRUCache[str, Dict[str, Any]](capacity=cache_size)
            self.compressor = DataCompressor(PERFORMANCE_CONFIG["compression_level"])
            self._write_lock = threading.Lock()  # SQLite 只允许单写者
            logger.info(f"Result archive opened at {self.engine.url} with cache size {cache_size}")
        except SQLAlchemyError as e:
            logger.error(f"Error opening result archive: {e}")
            raise

    def _get_or_create_payload(self, session, data: bytes) -> OutcomePayload:
        hash_value = hash_data(data)
        payload = (
            session.query(OutcomePayload).filter(OutcomePayload.hash_value == hash_value).first()
        )
        if payload is None:
            payload = OutcomePayload(hash_value=hash_value, data=data)
            session.add(payload)
            session.flush()
        return payload

    def get(self, key: str) -> Optional[Dict[str, Any]]:
        """
        查询归档结果

        Returns:
            VerificationOutcome.to_dict() 形式的字典, 未归档时为 None
        """
        cached = self.cache.get(key)
        if cached is not None:
            return cached
        session = self.Session()
        try:
            row = session.query(ArchivedOutcome).filter(ArchivedOutcome.key == key).first()
            if row is None:
                return None
            outcome = self.compressor.decompress_json(row.payload.data)
            self.cache.put(key, outcome)
            return outcome
        except SQLAlchemyError as e:
            logger.error(f"Error reading archived outcome {key}: {e}")
            return None
        finally:
            session.close()

    def put(self, key: str, outcome: Dict[str, Any], base_id: str = "", backend: str = "") -> None:
        """写入一条结果; 键已存在时覆盖"""
        with self._write_lock:
            self._put(key, outcome, base_id, backend)

    def _put(self, key: str, outcome: Dict[str, Any], base_id: str, backend: str) -> None:
        session = self.Session()
        try:
            payload = self._get_or_create_payload(session, self.compressor.compress_json(outcome))
            row = session.query(ArchivedOutcome).filter(ArchivedOutcome.key == key).first()
            if row is None:
                row = ArchivedOutcome(key=key)
                session.add(row)
            row.kind = outcome["kind"]
            row.base_id = base_id
            row.backend = backend
            row.payload = payload
            session.commit()
            self.cache.put(key, outcome)
        except SQLAlchemyError as e:
            session.rollback()
            logger.error(f"Error archiving outcome {key}: {e}")
        finally:
            session.close()

    def count_by_kind(self) -> Dict[str, int]:
        session = self.Session()
        try:
            rows = (
                session.query(ArchivedOutcome.kind, func.count(ArchivedOutcome.id))
                .group_by(ArchivedOutcome.kind)
                .all()
            )
            return {kind: count for kind, count in sorted(rows)}
        finally:
            session.close()

    def get_stats(self) -> Dict[str, Any]:
        return {"cache": self.cache.get_stats(), "outcomes": self.count_by_kind()}

    def close(self) -> None:
        self.engine.dispose()

"""
验证结果归档库的表定义
"""

import datetime

from sqlalchemy import Column, DateTime, ForeignKey, Integer, LargeBinary, String
from sqlalchemy.orm import declarative_base, relationship

Base = declarative_base()


class ArchivedOutcome(Base):
    """一次验证的归档结果, 键为 (后端, 验证器参数, 程序源码) 的哈希"""

    __tablename__ = "archived_outcomes"

    id = Column(Integer, primary_key=True)
    key = Column(String(32), unique=True, nullable=False, index=True)
    kind = Column(String(16), nullable=False, index=True)
    base_id = Column(String(255), nullable=False, default="", index=True)
    backend = Column(String(32), nullable=False)
    payload_id = Column(Integer, ForeignKey("outcome_payloads.id"), nullable=False)
    created_at = Column(DateTime, default=datetime.datetime.utcnow)

    payload = relationship("OutcomePayload", back_populates="outcomes")

    def __repr__(self):
        return f"<ArchivedOutcome(key={self.key}, kind={self.kind})>"


class OutcomePayload(Base):
    """压缩后的结果 JSON; 内容相同的结果共用一行"""

    __tablename__ = "outcome_payloads"

    id = Column(Integer, primary_key=True)
    hash_value = Column(String(32), unique=True, nullable=False, index=True)
    data = Column(LargeBinary, nullable=False)

    outcomes = relationship("ArchivedOutcome", back_populates="payload")

    def __repr__(self):
        return f"<OutcomePayload(id={self.id})>"


def init_db(engine):
    """
    初始化数据库表

    Args:
        engine: SQLAlchemy引擎
    """
    Base.metadata.create_all(engine)

"""
数据库模块初始化文件
"""

from .models import ArchivedOutcome, OutcomePayload, init_db
from .operations import ResultArchive

__all__ = [
    "ResultArchive",
    "ArchivedOutcome",
    "OutcomePayload",
    "init_db",
]

"""
结果归档操作模块
提供数据库连接和运行记录的增查
归档失败只记日志，不影响计算结果
"""

import json
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

import pytz
from sqlalchemy import create_engine
from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.orm import Session, sessionmaker

from src.constants import DEFAULT_TIMEZONE
from src.db.models import Base, ResultRow, RunRecord
from src.utils.logger import get_logger

logger = get_logger(__name__)


class Database:
    """数据库管理类"""

    def __init__(self, db_path: str, timezone: str = DEFAULT_TIMEZONE):
        """
        初始化数据库连接

        Args:
            db_path: 数据库文件路径，":memory:" 表示内存库
            timezone: 时间戳使用的 IANA 时区
        """
        if db_path != ":memory:":
            Path(db_path).parent.mkdir(parents=True, exist_ok=True)

        self.engine = create_engine(
            f'sqlite:///{db_path}',
            echo=False,
            pool_pre_ping=True
        )

        # expire_on_commit=False 确保 commit 后对象仍可访问
        self.SessionLocal = sessionmaker(
            autocommit=False,
            autoflush=False,
            bind=self.engine,
            expire_on_commit=False
        )
        self.tz = pytz.timezone(timezone)

        logger.debug(f"Database initialized: {db_path}")

    def init_db(self):
        """创建所有表"""
        Base.metadata.create_all(bind=self.engine)
        logger.debug("Database tables created")

    def get_session(self) -> Session:
        """获取数据库会话"""
        return self.SessionLocal()

    def _now(self) -> datetime:
        return datetime.now(self.tz)

    # ==================== RunRecord ====================

    def create_run(self, command: str, arguments: Dict[str, Any]) -> Optional[RunRecord]:
        """
        新建运行记录

        Args:
            command: 子命令
            arguments: 解析后的参数

        Returns:
            RunRecord 对象，失败返回 None
        """
        try:
            with self.get_session() as session:
                run = RunRecord(
                    command=command,
                    arguments=json.dumps(arguments, sort_keys=True, default=str),
                    created_at=self._now(),
                )
                session.add(run)
                session.commit()
                session.refresh(run)
                logger.debug(f"Run created: id={run.id}, command={command}")
                return run
        except SQLAlchemyError as e:
            logger.error(f"Database error in create_run: {e}")
            return None

    def add_rows(self, run_id: int, rows: List[Dict[str, Any]]) -> bool:
        """
        追加输出行，序号接着已有的行往后排

        Returns:
            是否成功
        """
        try:
            with self.get_session() as session:
                start = session.query(ResultRow).filter(ResultRow.run_id == run_id).count()
                for offset, row in enumerate(rows):
                    session.add(ResultRow(
                        run_id=run_id,
                        ordinal=start + offset,
                        payload=json.dumps(row, sort_keys=True, default=str),
                    ))
                session.commit()
                return True
        except SQLAlchemyError as e:
            logger.error(f"Database error in add_rows: {e}")
            return False

    def finish_run(self, run_id: int, exit_code: int, verdict: Optional[str] = None) -> bool:
        """
        记录退出码与结论

        Returns:
            是否成功
        """
        try:
            with self.get_session() as session:
                run = session.query(RunRecord).filter(RunRecord.id == run_id).first()
                if not run:
                    return False
                run.exit_code = exit_code
                run.verdict = verdict
                run.finished_at = self._now()
                session.commit()
                return True
        except SQLAlchemyError as e:
            logger.error(f"Database error in finish_run: {e}")
            return False

    def get_run(self, run_id: int) -> Optional[RunRecord]:
        try:
            with self.get_session() as session:
                return session.query(RunRecord).filter(RunRecord.id == run_id).first()
        except SQLAlchemyError as e:
            logger.error(f"Database error in get_run: {e}")
            return None

    def get_rows(self, run_id: int) -> List[Dict[str, Any]]:
        """按序号返回某次运行的输出行"""
        try:
            with self.get_session() as session:
                rows = session.query(ResultRow).filter(
                    ResultRow.run_id == run_id
                ).order_by(ResultRow.ordinal).all()
                return [json.loads(row.payload) for row in rows]
        except SQLAlchemyError as e:
            logger.error(f"Database error in get_rows: {e}")
            return []

    def list_runs(self, command: Optional[str] = None, limit: int = 50) -> List[RunRecord]:
        """最近的运行记录，新的在前"""
        try:
            with self.get_session() as session:
                query = session.query(RunRecord)
                if command:
                    query = query.filter(RunRecord.command == command)
                return query.order_by(RunRecord.id.desc()).limit(limit).all()
        except SQLAlchemyError as e:
            logger.error(f"Database error in list_runs: {e}")
            return []


# 全局数据库实例
_db_instance: Optional[Database] = None


def get_database(db_path: Optional[str] = None, timezone: str = DEFAULT_TIMEZONE) -> Database:
    """
    获取全局数据库实例（单例模式）

    Args:
        db_path: 数据库路径（仅首次调用时有效）
        timezone: 时间戳时区（仅首次调用时有效）

    Returns:
        Database 实例
    """
    global _db_instance

    if _db_instance is None:
        if db_path is None:
            raise ValueError("首次调用必须提供 db_path")
        _db_instance = Database(db_path, timezone)

    return _db_instance

"""
结果归档的数据库模型
每次命令运行一条 RunRecord，每个输出行一条 ResultRow
"""

from sqlalchemy import (
    Column, Integer, String, DateTime, ForeignKey, Index, Text, CheckConstraint
)
from sqlalchemy.orm import declarative_base, relationship

from src.constants import VERDICT_EXACT_ZERO, VERDICT_FAIL, VERDICT_NOT_FOUND, VERDICT_PASS

Base = declarative_base()


class RunRecord(Base):
    """
    运行记录表
    一次 CLI 调用的参数、退出码与结论
    """
    __tablename__ = 'runs'

    id = Column(Integer, primary_key=True, autoincrement=True)

    # 子命令（count / wordcheck / scon / trace / verify / asympt / covariance）
    command = Column(String(32), nullable=False, index=True)

    # 参数（JSON，键已排序）
    arguments = Column(Text, nullable=False)

    # 退出码，运行结束前为空
    exit_code = Column(Integer, nullable=True)

    # PASS / FAIL / EXACT_ZERO / NOT_FOUND，不做判定的命令为空
    verdict = Column(String(16), nullable=True)

    # 创建时间（按配置的时区，带时区信息）
    created_at = Column(DateTime(timezone=True), nullable=False)

    finished_at = Column(DateTime(timezone=True), nullable=True)

    rows = relationship('ResultRow', back_populates='run', cascade='all, delete-orphan',
                        order_by='ResultRow.ordinal')

    __table_args__ = (
        CheckConstraint(
            f"verdict IS NULL OR verdict IN ('{VERDICT_PASS}', '{VERDICT_FAIL}', "
            f"'{VERDICT_EXACT_ZERO}', '{VERDICT_NOT_FOUND}')",
            name='check_verdict'
        ),
    )

    def __repr__(self):
        return (
            f"<RunRecord(id={self.id}, command={self.command}, "
            f"exit_code={self.exit_code}, verdict={self.verdict})>"
        )


class ResultRow(Base):
    """
    结果行表
    保存一行标准输出对应的 JSON
    """
    __tablename__ = 'result_rows'

    id = Column(Integer, primary_key=True, autoincrement=True)

    run_id = Column(Integer, ForeignKey('runs.id'), nullable=False)

    # 行在输出中的序号（从 0 开始）
    ordinal = Column(Integer, nullable=False)

    payload = Column(Text, nullable=False)

    run = relationship('RunRecord', back_populates='rows')

    __table_args__ = (
        Index('idx_run_ordinal', 'run_id', 'ordinal'),
    )

    def __repr__(self):
        return f"<ResultRow(run_id={self.run_id}, ordinal={self.ordinal})>"

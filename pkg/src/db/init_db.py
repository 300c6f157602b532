"""
建表脚本
python -m src.db.init_db [--config PATH]
"""

import argparse
from typing import List, Optional

from src.db.database import Database
from src.db.models import Base
from src.utils.config import get_config
from src.utils.logger import setup_logger


def init_database(config_path: Optional[str] = None) -> List[str]:
    """
    按配置中的 database.path 建表

    Returns:
        已创建（或已存在）的表名
    """
    config = get_config(config_path)
    logger = setup_logger(level=config.log_level, log_file=config.log_file)
    db = Database(config.db_path, config.default_timezone)
    db.init_db()
    tables = sorted(Base.metadata.tables)
    logger.info(f"Archive ready at {config.db_path}: {', '.join(tables)}")
    return tables


if __name__ == '__main__':
    parser = argparse.ArgumentParser(description='初始化结果归档数据库')
    parser.add_argument('--config', default=None)
    init_database(parser.parse_args().config)

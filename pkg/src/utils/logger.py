"""
日志
- 全部处理器都挂在 "permfree" 之下，模块用 get_logger(__name__) 取子记录器
- 控制台只写标准错误，标准输出留给机器可读结果
- a_N 这类上万位的整数在日志里只保留首尾
"""

import logging
import re
import sys
from pathlib import Path
from typing import Optional

from src.constants import LOG_MAX_DIGITS

ROOT_LOGGER = "permfree"
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'

_LONG_INTEGER = re.compile(r'\d{%d,}' % (LOG_MAX_DIGITS + 1))


def abbreviate_integers(text: str, max_digits: int = LOG_MAX_DIGITS) -> str:
    """超过 max_digits 位的整数写成 "首位…末位 (n digits)" """
    half = max(max_digits // 2, 1)

    def shorten(match: re.Match) -> str:
        digits = match.group(0)
        return f"{digits[:half]}…{digits[-half:]} ({len(digits)} digits)"

    return re.sub(r'\d{%d,}' % (max_digits + 1), shorten, text)


class BigIntegerFilter(logging.Filter):
    """把消息里的超长整数缩写后再交给处理器"""

    def filter(self, record: logging.LogRecord) -> bool:
        message = record.getMessage()
        if _LONG_INTEGER.search(message):
            record.msg = abbreviate_integers(message)
            record.args = None
        return True


def _handler(handler: logging.Handler, level: int) -> logging.Handler:
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(fmt=LOG_FORMAT, datefmt=DATE_FORMAT))
    handler.addFilter(BigIntegerFilter())
    return handler


def setup_logger(
    name: str = ROOT_LOGGER,
    level: str = "INFO",
    log_file: Optional[str] = None,
) -> logging.Logger:
    """
    配置日志记录器，重复调用只更新级别

    Args:
        name: 记录器名称
        level: DEBUG / INFO / WARNING / ERROR / CRITICAL
        log_file: 另外写入的日志文件（可选）

    Returns:
        记录器

    Raises:
        ValueError: 未知的日志级别
    """
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        raise ValueError(f"未知的日志级别: {level!r}")

    logger = logging.getLogger(name)
    logger.setLevel(numeric)
    if logger.handlers:
        for handler in logger.handlers:
            handler.setLevel(numeric)
        return logger

    logger.addHandler(_handler(logging.StreamHandler(sys.stderr), numeric))
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        logger.addHandler(_handler(logging.FileHandler(log_file, encoding='utf-8'), numeric))
    return logger


def get_logger(name: str = ROOT_LOGGER) -> logging.Logger:
    """模块记录器，名称挂到 permfree 之下"""
    if name != ROOT_LOGGER and not name.startswith(ROOT_LOGGER + "."):
        name = f"{ROOT_LOGGER}.{name}"
    return logging.getLogger(name)


def log_computation(
    logger: logging.Logger,
    operation: str,
    size: int,
    extra_info: Optional[str] = None,
) -> None:
    """
    DEBUG 级别记录一次计算及其规模（顶点数、N 或样本数）

    Args:
        logger: 记录器
        operation: 操作名，如 "enumerate_congruences"
        size: 规模
        extra_info: 附加说明
    """
    if not logger.isEnabledFor(logging.DEBUG):
        return
    message = f"Computation: {operation}, size={size}"
    if extra_info:
        message = f"{message}, {extra_info}"
    logger.debug(message)

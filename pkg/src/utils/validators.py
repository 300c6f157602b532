"""
输入验证工具
命令行参数在分派到核心模块之前先在这里校验
"""

import re
from typing import List, Tuple

import pytz

from src.constants import OUTPUT_FORMATS

_RANGE_PATTERN = re.compile(r'^(\d+)\.\.(\d+)(?::(\d+))?$')


def validate_timezone(tz_name: str) -> bool:
    """
    验证时区名称是否有效

    Args:
        tz_name: IANA 时区名称

    Returns:
        是否有效
    """
    try:
        pytz.timezone(tz_name)
        return True
    except pytz.UnknownTimeZoneError:
        return False


def validate_format(fmt: str) -> bool:
    return fmt in OUTPUT_FORMATS


def validate_positive(value: int, name: str) -> int:
    """
    Raises:
        ValueError: value 不是正整数
    """
    if not isinstance(value, int) or value < 1:
        raise ValueError(f"{name} 必须是正整数: {value!r}")
    return value


def validate_non_negative(value: int, name: str) -> int:
    """
    Raises:
        ValueError: value 为负
    """
    if not isinstance(value, int) or value < 0:
        raise ValueError(f"{name} 必须是非负整数: {value!r}")
    return value


def parse_grid(text: str) -> Tuple[str, List[int]]:
    """
    解析 N 网格

    Args:
        text: 显式列表 "50,100,200"，或区间 "lo..hi"、"lo..hi:points"

    Returns:
        ("list", [N...]) 或 ("range", [lo, hi, points])，points 缺省为 0

    Raises:
        ValueError: 格式错误、非正或非严格递增
    """
    text = text.strip()
    match = _RANGE_PATTERN.match(text)
    if match:
        lo, hi = int(match.group(1)), int(match.group(2))
        points = int(match.group(3)) if match.group(3) else 0
        if lo < 1 or hi < lo:
            raise ValueError(f"非法的区间: {text!r}")
        return "range", [lo, hi, points]

    try:
        values = [int(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise ValueError(f"无法解析的 N 网格: {text!r}") from None
    if not values:
        raise ValueError("N 网格不能为空")
    if any(v < 1 for v in values):
        raise ValueError(f"N 网格中的值必须为正: {text!r}")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"N 网格必须严格递增: {text!r}")
    return "list", values


def split_words(text: str) -> List[str]:
    """
    多个单词用 ';' 分隔，如 "g1 g2; g1*"
    单个空白串表示空单词 e
    """
    return [part.strip() for part in text.split(';')]


def split_cycle_sets(text: str) -> List[str]:
    """
    拆分逗号分隔的循环集合列表
    纯数字的片段属于前一个集合，如 "finite:1,3,all" → ["finite:1,3", "all"]

    Raises:
        ValueError: 第一个片段就是数字
    """
    parts: List[str] = []
    for token in (t.strip() for t in re.split(r'[,;]', text)):
        if not token:
            continue
        if token.isdigit():
            if not parts:
                raise ValueError(f"无法解析的循环集合列表: {text!r}")
            parts[-1] = f"{parts[-1]},{token}"
        else:
            parts.append(token)
    if not parts:
        raise ValueError("循环集合列表不能为空")
    return parts

"""
配置模块
读取 JSON 配置（点号分隔的嵌套键），缺省值来自 src/constants.py
加载时即校验格式、时区与各项上限，错误配置以 ValueError 报出
"""

import json
from pathlib import Path
from typing import Any, Optional, Union

from src.constants import (
    DEFAULT_BRUTE_BUDGET, DEFAULT_COUNT_CAP, DEFAULT_DB_PATH, DEFAULT_FORMAT,
    DEFAULT_SEED, DEFAULT_SERIES_BOUND, DEFAULT_TIMEZONE, DEFAULT_VERTEX_BOUND,
    DEFAULT_WORKERS, OUTPUT_FORMATS,
)
from src.utils.validators import validate_timezone

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

# 必须为正整数的配置项及其缺省值
_POSITIVE_KEYS = {
    'defaults.workers': DEFAULT_WORKERS,
    'limits.vertex_bound': DEFAULT_VERTEX_BOUND,
    'limits.brute_budget': DEFAULT_BRUTE_BUDGET,
    'limits.series_bound': DEFAULT_SERIES_BOUND,
    'limits.count_cap': DEFAULT_COUNT_CAP,
}

DEFAULT_CONFIG_FILE = Path(__file__).resolve().parents[2] / "config.json"


class Config:
    """运行配置"""

    def __init__(self, config_path: Optional[Union[str, Path]] = None):
        """
        Args:
            config_path: 配置文件路径；为 None 时尝试项目根目录的 config.json，
                         该文件不存在时全部使用缺省值

        Raises:
            FileNotFoundError: 显式指定的文件不存在
            ValueError: JSON 格式错误或配置值非法
        """
        self.explicit = config_path is not None
        self.config_path = Path(config_path) if self.explicit else DEFAULT_CONFIG_FILE
        self._config = self._read()
        self.validate()

    def _read(self) -> dict:
        if not self.config_path.exists():
            if self.explicit:
                raise FileNotFoundError(
                    f"配置文件不存在: {self.config_path}\n参考 config.example.json"
                )
            return {}
        with self.config_path.open(encoding='utf-8') as f:
            data = json.load(f)
        if not isinstance(data, dict):
            raise ValueError(f"配置文件顶层必须是对象: {self.config_path}")
        return data

    def get(self, key: str, default: Any = None) -> Any:
        """
        按 "a.b.c" 形式的键取值，任一层缺失时返回 default
        """
        node: Any = self._config
        for part in key.split('.'):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def _positive(self, key: str) -> int:
        return int(self.get(key, _POSITIVE_KEYS[key]))

    def validate(self) -> None:
        """
        Raises:
            ValueError: 输出格式、时区或上限不合法
        """
        for key, default in _POSITIVE_KEYS.items():
            value = self.get(key, default)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ValueError(f"配置项 {key} 必须是正整数: {value!r}")
        if not isinstance(self.get('defaults.seed', DEFAULT_SEED), int):
            raise ValueError("配置项 defaults.seed 必须是整数")
        if self.default_format not in OUTPUT_FORMATS:
            raise ValueError(f"配置项 defaults.format 只能是 {'/'.join(OUTPUT_FORMATS)}")
        if not validate_timezone(self.default_timezone):
            raise ValueError(f"未知的时区: {self.default_timezone!r}")
        if str(self.log_level).upper() not in LOG_LEVELS:
            raise ValueError(f"未知的日志级别: {self.log_level!r}")

    # ==================== defaults ====================

    @property
    def default_seed(self) -> int:
        return int(self.get('defaults.seed', DEFAULT_SEED))

    @property
    def default_workers(self) -> int:
        return self._positive('defaults.workers')

    @property
    def default_format(self) -> str:
        return self.get('defaults.format', DEFAULT_FORMAT)

    @property
    def default_timezone(self) -> str:
        """归档时间戳使用的时区"""
        return self.get('defaults.timezone', DEFAULT_TIMEZONE)

    # ==================== limits ====================

    @property
    def vertex_bound(self) -> int:
        """同余枚举的顶点上限"""
        return self._positive('limits.vertex_bound')

    @property
    def brute_budget(self) -> int:
        """暴力枚举的置换元组上限"""
        return self._positive('limits.brute_budget')

    @property
    def series_bound(self) -> int:
        return self._positive('limits.series_bound')

    @property
    def count_cap(self) -> int:
        return self._positive('limits.count_cap')

    # ==================== archive / logging ====================

    @property
    def db_path(self) -> str:
        return self.get('database.path', DEFAULT_DB_PATH)

    @property
    def archive_enabled(self) -> bool:
        return bool(self.get('archive.enabled', False))

    @property
    def log_level(self) -> str:
        return self.get('logging.level', 'INFO')

    @property
    def log_file(self) -> Optional[str]:
        return self.get('logging.file')


_config_instance: Optional[Config] = None


def get_config(config_path: Optional[Union[str, Path]] = None) -> Config:
    """
    全局配置（单例）

    Args:
        config_path: 只在首次调用时生效
    """
    global _config_instance
    if _config_instance is None:
        _config_instance = Config(config_path)
    return _config_instance


def reset_config() -> None:
    """丢弃全局实例，下一次 get_config 重新加载"""
    global _config_instance
    _config_instance = None

"""
配置与日志单元测试
"""

import json
import logging
import os
import tempfile
import unittest

from src.constants import DEFAULT_SEED, DEFAULT_VERTEX_BOUND
from src.utils.config import Config, get_config, reset_config
from src.utils.logger import BigIntegerFilter, abbreviate_integers, get_logger


class TestConfig(unittest.TestCase):
    """配置读取"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, "config.json")
        with open(self.path, "w", encoding="utf-8") as f:
            json.dump({
                "defaults": {"seed": 7, "format": "csv", "timezone": "Asia/Shanghai"},
                "limits": {"vertex_bound": 10},
                "archive": {"enabled": True},
            }, f)
        reset_config()

    def tearDown(self):
        reset_config()
        self.tmp.cleanup()

    def test_values_and_defaults(self):
        config = Config(self.path)
        self.assertEqual(config.default_seed, 7)
        self.assertEqual(config.default_format, "csv")
        self.assertEqual(config.vertex_bound, 10)
        self.assertTrue(config.archive_enabled)
        self.assertEqual(config.brute_budget, 10 ** 7)
        self.assertEqual(config.log_level, "INFO")
        self.assertIsNone(config.log_file)

    def test_dotted_get(self):
        config = Config(self.path)
        self.assertEqual(config.get("defaults.timezone"), "Asia/Shanghai")
        self.assertIsNone(config.get("defaults.missing"))
        self.assertEqual(config.get("limits.vertex_bound.deeper", 3), 3)

    def test_missing_explicit_file(self):
        with self.assertRaises(FileNotFoundError):
            Config(os.path.join(self.tmp.name, "absent.json"))

    def test_invalid_json(self):
        with open(self.path, "w", encoding="utf-8") as f:
            f.write("{not json")
        with self.assertRaises(ValueError):
            Config(self.path)

    def test_invalid_values(self):
        cases = [
            {"defaults": {"format": "xml"}},
            {"defaults": {"timezone": "Mars/Olympus"}},
            {"defaults": {"workers": 0}},
            {"limits": {"vertex_bound": "14"}},
            {"logging": {"level": "LOUD"}},
            [1, 2],
        ]
        for data in cases:
            with self.subTest(data=data):
                with open(self.path, "w", encoding="utf-8") as f:
                    json.dump(data, f)
                with self.assertRaises(ValueError):
                    Config(self.path)

    def test_empty_config_uses_constants(self):
        path = os.path.join(self.tmp.name, "empty.json")
        with open(path, "w", encoding="utf-8") as f:
            f.write("{}")
        config = Config(path)
        self.assertEqual(config.default_seed, DEFAULT_SEED)
        self.assertEqual(config.vertex_bound, DEFAULT_VERTEX_BOUND)

    def test_singleton(self):
        first = get_config(self.path)
        self.assertIs(get_config(), first)
        reset_config()
        self.assertIsNot(get_config(self.path), first)


class TestLogger(unittest.TestCase):
    """日志中的大整数缩写"""

    def test_abbreviate(self):
        digits = "1" * 10 + "9" * 50
        text = abbreviate_integers(f"a_N={digits}")
        self.assertIn("(60 digits)", text)
        self.assertTrue(text.startswith("a_N=" + "1" * 10 + "9" * 10 + "…"))
        self.assertEqual(abbreviate_integers("N=12345"), "N=12345")

    def test_filter_rewrites_record(self):
        record = logging.LogRecord("permfree", logging.INFO, __file__, 1, "a=%s", ("7" * 80,), None)
        self.assertTrue(BigIntegerFilter().filter(record))
        self.assertIn("(80 digits)", record.getMessage())

    def test_logger_namespace(self):
        self.assertEqual(get_logger("src.core.trace").name, "permfree.src.core.trace")
        self.assertEqual(get_logger().name, "permfree")


if __name__ == '__main__':
    unittest.main()

"""测试模块"""

import os

# 设置 PERMFREE_SLOW_TESTS=1 时运行完整的穷举网格
SLOW_TESTS = os.environ.get("PERMFREE_SLOW_TESTS", "") not in ("", "0")

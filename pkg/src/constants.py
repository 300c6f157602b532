"""
常量定义
"""

import math

# 无穷阶（d_r = ∞）
INFINITY = math.inf

# 计算方式标签
METHOD_EXACT = "exact"
METHOD_BRUTE = "brute"
METHOD_MC = "mc"
TRACE_METHODS = (METHOD_EXACT, METHOD_BRUTE, METHOD_MC)

# 判定结果
VERDICT_PASS = "PASS"
VERDICT_FAIL = "FAIL"
VERDICT_EXACT_ZERO = "EXACT_ZERO"
VERDICT_NOT_FOUND = "NOT_FOUND"

# 退出码
EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3

# 输出格式
FORMAT_JSON = "json"
FORMAT_CSV = "csv"
OUTPUT_FORMATS = (FORMAT_JSON, FORMAT_CSV)

# 循环长度集合的文本前缀
CYCLESET_ALL = "all"
CYCLESET_FINITE = "finite"
CYCLESET_COFINITE = "cofinite"
CYCLESET_MULTIPLES = "multiples"

# 渐近诊断的规律标识
LAW_LIMPNK = "limpnk"
LAW_LIMPNG = "limpng"
LAW_HAYMAN = "hayman"
LAW_HILDEBRAND = "hildebrand"
LAW_MULTIPLES = "multiples"
LAW_COUNTEREXAMPLE = "counterexample"

# 默认配置
DEFAULT_SEED = 20240521
DEFAULT_WORKERS = 1
DEFAULT_FORMAT = FORMAT_JSON
DEFAULT_TIMEZONE = "UTC"
DEFAULT_VERTEX_BOUND = 14       # 同余枚举的顶点上限
DEFAULT_BRUTE_BUDGET = 10 ** 7  # 暴力枚举的置换元组上限
DEFAULT_SERIES_BOUND = 200      # 指数生成函数校验的截断上限
DEFAULT_COUNT_CAP = 10 ** 4     # 反例序列搜索上限
DEFAULT_MC_SAMPLES = 10 ** 4
DEFAULT_GRID_POINTS = 8
ROTATION_CHECK_MAX_LEN = 16      # 旋转刻画交叉检验的单词长度上限
DEFAULT_DB_PATH = "data/results.db"

# 判定容差
DEFAULT_FREENESS_ENVELOPE = 2.0      # |E tr U_w - φ(u_w)| <= C/N
RATE_SLOPE_BOUND = -0.9              # 单词迹的衰减斜率上界
COVARIANCE_SLOPE_BOUND = -1.05       # 协方差的衰减斜率上界（可和性）
FINITE_RATIO_TOLERANCE = 0.2
INFINITE_RATIO_TOLERANCE = 1e-6
MULTIPLES_RATIO_TOLERANCE = 0.05
SINGLETON_RATIO_TOLERANCE = 0.01
HILDEBRAND_TOLERANCE = 1e-6
HILDEBRAND_MIN_N = 50
TREND_SLACK = 1e-9                  # 比值趋势判定允许的浮点噪声

# 日志中整数字面量的最大显示位数
LOG_MAX_DIGITS = 40

"""
异常定义
输入格式错误统一使用 ValueError，这里只放需要区分退出码的情况
"""

from typing import Optional


class PermFreeError(Exception):
    """本项目异常基类"""


class BudgetExceededError(PermFreeError):
    """枚举规模超出预算"""

    def __init__(self, what: str, size: int, budget: int):
        self.what = what
        self.size = size
        self.budget = budget
        super().__init__(f"{what} 规模 {size} 超出预算 {budget}")


class InfeasibleSizeError(PermFreeError):
    """S_N^(A) 为空（a_N = 0）"""

    def __init__(self, cycle_set: str, n: int, hint: Optional[str] = None):
        self.cycle_set = cycle_set
        self.n = n
        message = f"N={n} 时 S_N^({cycle_set}) 为空"
        if hint:
            message = f"{message}（{hint}）"
        super().__init__(message)


class InadmissibleGraphError(PermFreeError, ValueError):
    """图不是可容许图"""


class DisconnectedGraphError(PermFreeError, ValueError):
    """图不连通"""

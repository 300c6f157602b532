"""
permfree - 受限循环长度随机置换矩阵的单词迹矩
"""

__version__ = "1.0.0"

"""
循环长度受限的置换计数
- a_N^(A) = |S_N^(A)| 的精确计数表（大整数）
- 循环概率 p_N^(A)(k) 与图相容概率 p_N^(A)(Γ)（精确有理数）
- S_N^(A) 上的精确均匀抽样
"""

import csv
import io
import itertools
import math
import random
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Iterator, List, Sequence, Tuple

import numpy as np

from src.constants import (
    CYCLESET_ALL, CYCLESET_COFINITE, CYCLESET_FINITE, CYCLESET_MULTIPLES,
    DEFAULT_SERIES_BOUND, INFINITY,
)
from src.core.errors import BudgetExceededError, InfeasibleSizeError
from src.core.graphs import ColoredGraph, is_a_graph, is_admissible, loop_shape
from src.core.partitions import iter_partitions
from src.utils.logger import get_logger, log_computation

logger = get_logger(__name__)


@dataclass(frozen=True)
class CycleSet:
    """
    允许的循环长度集合 A

    Attributes:
        kind: finite / cofinite / multiples / all
        values: finite 时为成员，cofinite 时为排除的长度（升序）
        step: multiples 时的 D
    """

    kind: str
    values: Tuple[int, ...] = ()
    step: int = 1

    def __post_init__(self):
        if self.kind not in (CYCLESET_ALL, CYCLESET_FINITE, CYCLESET_COFINITE, CYCLESET_MULTIPLES):
            raise ValueError(f"未知的循环集合类型: {self.kind!r}")
        if any(not isinstance(v, int) or v < 1 for v in self.values):
            raise ValueError("循环长度必须是正整数")
        if self.kind == CYCLESET_FINITE and not self.values:
            raise ValueError("有限循环集合不能为空")
        if self.kind == CYCLESET_MULTIPLES and self.step < 1:
            raise ValueError("倍数集合的 D 必须是正整数")
        object.__setattr__(self, 'values', tuple(sorted(set(self.values))))

    # ==================== 构造 ====================

    @classmethod
    def all(cls) -> "CycleSet":
        return cls(CYCLESET_ALL)

    @classmethod
    def finite(cls, members: Iterable[int]) -> "CycleSet":
        return cls(CYCLESET_FINITE, tuple(members))

    @classmethod
    def cofinite(cls, excluded: Iterable[int]) -> "CycleSet":
        """ℕ 去掉有限个长度；不排除任何长度时即 All"""
        excluded = tuple(excluded)
        if not excluded:
            return cls.all()
        return cls(CYCLESET_COFINITE, excluded)

    @classmethod
    def multiples(cls, step: int) -> "CycleSet":
        return cls(CYCLESET_MULTIPLES, (), step)

    # ==================== 查询 ====================

    @property
    def is_finite(self) -> bool:
        return self.kind == CYCLESET_FINITE

    @property
    def is_complement_finite(self) -> bool:
        """All 或 cofinite"""
        return self.kind in (CYCLESET_ALL, CYCLESET_COFINITE)

    @property
    def excluded(self) -> Tuple[int, ...]:
        return self.values if self.kind == CYCLESET_COFINITE else ()

    def contains(self, j: int) -> bool:
        if j < 1:
            return False
        if self.kind == CYCLESET_FINITE:
            return j in self.values
        if self.kind == CYCLESET_COFINITE:
            return j not in self.values
        if self.kind == CYCLESET_MULTIPLES:
            return j % self.step == 0
        return True

    def __contains__(self, j: int) -> bool:
        return self.contains(j)

    @property
    def sup(self):
        """有限集合为最大元，其余为 INFINITY"""
        return max(self.values) if self.is_finite else INFINITY

    @property
    def gcd(self) -> int:
        if self.is_finite:
            return math.gcd(*self.values)
        if self.kind == CYCLESET_MULTIPLES:
            return self.step
        return 1

    @property
    def is_singleton_or_infinite(self) -> bool:
        return not self.is_finite or len(self.values) == 1

    def members_upto(self, n: int) -> List[int]:
        """A ∩ [n]"""
        if self.is_finite:
            return [j for j in self.values if j <= n]
        return [j for j in range(1, n + 1) if self.contains(j)]

    def complement_sum(self) -> Fraction:
        """Σ_{j∉A} 1/j，仅对 All 与 cofinite 有限"""
        if not self.is_complement_finite:
            raise ValueError(f"{self} 的补集是无限集")
        return sum((Fraction(1, x) for x in self.excluded), Fraction(0))

    def is_nonempty(self, n: int) -> bool:
        """S_n^(A) 非空（等价于 a_n > 0）：n 能写成 A 中元素之和"""
        if n < 0:
            return False
        if n == 0 or self.contains(n):
            return True
        if self.kind == CYCLESET_MULTIPLES:
            return False
        reachable = [True] + [False] * n
        members = self.members_upto(n)
        for total in range(1, n + 1):
            reachable[total] = any(reachable[total - j] for j in members if j <= total)
        return reachable[n]

    def __str__(self) -> str:
        return format_cycle_set(self)


def parse_cycle_set(text: str) -> CycleSet:
    """
    解析循环集合文本：all、finite:1,3,5、cofinite:1、multiples:3

    Raises:
        ValueError: 格式错误
    """
    text = text.strip().lower()
    if text == CYCLESET_ALL:
        return CycleSet.all()
    kind, sep, body = text.partition(':')
    if not sep:
        raise ValueError(f"无法识别的循环集合: {text!r}")
    try:
        numbers = [int(item) for item in body.split(',') if item.strip()]
    except ValueError:
        raise ValueError(f"循环集合中存在非整数: {body!r}") from None
    if kind == CYCLESET_FINITE:
        return CycleSet.finite(numbers)
    if kind == CYCLESET_COFINITE:
        return CycleSet.cofinite(numbers)
    if kind == CYCLESET_MULTIPLES:
        if len(numbers) != 1:
            raise ValueError(f"multiples 需要恰好一个 D: {text!r}")
        return CycleSet.multiples(numbers[0])
    raise ValueError(f"未知的循环集合类型: {kind!r}")


def format_cycle_set(cycle_set: CycleSet) -> str:
    if cycle_set.kind == CYCLESET_ALL:
        return CYCLESET_ALL
    if cycle_set.kind == CYCLESET_MULTIPLES:
        return f"{CYCLESET_MULTIPLES}:{cycle_set.step}"
    return f"{cycle_set.kind}:" + ",".join(str(v) for v in cycle_set.values)


# ==================== 计数表 ====================

@dataclass(frozen=True)
class CountTable:
    """a_0..a_{n_max}，t_N = a_N / N!"""

    cycle_set: CycleSet
    a: Tuple[int, ...]

    def __post_init__(self):
        if not self.a or self.a[0] != 1:
            raise ValueError("计数表必须从 a_0 = 1 开始")

    @property
    def n_max(self) -> int:
        return len(self.a) - 1

    def count(self, n: int) -> int:
        if not 0 <= n <= self.n_max:
            raise ValueError(f"N={n} 超出计数表范围 [0, {self.n_max}]")
        return self.a[n]

    def t(self, n: int) -> Fraction:
        return Fraction(self.count(n), math.factorial(n))

    def require_nonempty(self, n: int) -> None:
        """
        Raises:
            InfeasibleSizeError: a_n = 0
        """
        if self.count(n) == 0:
            raise InfeasibleSizeError(
                str(self.cycle_set), n, f"gcd(A)={self.cycle_set.gcd}"
            )


def iter_counts(cycle_set: CycleSet) -> Iterator[int]:
    """
    依次生成 a_0, a_1, a_2, ...

    有限集合与倍数集合按 1 所在循环的长度 j 展开：
        a_N = Σ_{j∈A∩[N]} (N−1)!/(N−j)! · a_{N−j}
    All 与 cofinite 用补集 X 的修正项 e_N：
        e_0 = 1, e_N = −Σ_{x∈X, x≤N} (N−1)!/(N−x)! · e_{N−x}
        a_N = N · a_{N−1} + e_N
    """
    a = [1]
    yield 1
    if cycle_set.is_complement_finite:
        excluded = cycle_set.excluded
        e = [1]
        for n in itertools.count(1):
            correction = -sum(
                math.perm(n - 1, x - 1) * e[n - x] for x in excluded if x <= n
            )
            e.append(correction)
            a.append(n * a[n - 1] + correction)
            yield a[n]
    else:
        for n in itertools.count(1):
            total = 0
            falling = 1
            for j in range(1, n + 1):
                if j > cycle_set.sup:
                    break
                if j > 1:
                    falling *= n - j + 1
                if cycle_set.contains(j):
                    total += falling * a[n - j]
            a.append(total)
            yield total


@lru_cache(maxsize=128)
def count_table(cycle_set: CycleSet, n_max: int) -> CountTable:
    """
    计数表 a_0..a_{n_max}

    Raises:
        ValueError: n_max < 0
    """
    if n_max < 0:
        raise ValueError("N_max 必须非负")
    a = tuple(itertools.islice(iter_counts(cycle_set), n_max + 1))
    log_computation(logger, "count_table", n_max, f"A={cycle_set}")
    return CountTable(cycle_set, a)


def _series_mul(first: List[Fraction], second: List[Fraction], bound: int) -> List[Fraction]:
    product = [Fraction(0)] * (bound + 1)
    for i, x in enumerate(first):
        if x == 0:
            continue
        for j in range(bound + 1 - i):
            if second[j]:
                product[i + j] += x * second[j]
    return product


def egf_crosscheck(
    cycle_set: CycleSet,
    n_max: int,
    series_bound: int = DEFAULT_SERIES_BOUND,
) -> bool:
    """
    用截断幂级数 exp(Σ_{k∈A∩[n_max]} z^k/k) = Σ_m g^m/m! 独立计算 t_N，
    与递推得到的计数表逐项比较

    Raises:
        BudgetExceededError: n_max 超过级数截断上限
    """
    if n_max > series_bound:
        raise BudgetExceededError("指数生成函数截断阶", n_max, series_bound)
    g = [Fraction(0)] * (n_max + 1)
    for k in cycle_set.members_upto(n_max):
        g[k] = Fraction(1, k)

    series = [Fraction(0)] * (n_max + 1)
    series[0] = Fraction(1)
    power = series[:]
    # g 无常数项，g^m 的最低次数为 m
    for m in range(1, n_max + 1):
        power = _series_mul(power, g, n_max)
        for i in range(m, n_max + 1):
            series[i] += power[i] / math.factorial(m)

    table = count_table(cycle_set, n_max)
    mismatches = [n for n in range(n_max + 1) if table.t(n) != series[n]]
    if mismatches:
        logger.warning(f"指数生成函数校验失败: A={cycle_set}, N={mismatches[:5]}")
    return not mismatches


# ==================== 概率 ====================

def p_cycle(table: CountTable, n: int, k: int) -> Fraction:
    """
    p_N^(A)(k)：固定点落在长度为 k 的循环中的概率
        = (N−1)!/(N−k)! · a_{N−k} / a_N

    Raises:
        ValueError: k ∉ A 或 k > N
        InfeasibleSizeError: a_N = 0
    """
    if not table.cycle_set.contains(k):
        raise ValueError(f"k={k} 不在 {table.cycle_set} 中")
    if k > n:
        raise ValueError(f"k={k} 超过 N={n}")
    table.require_nonempty(n)
    return Fraction(math.perm(n - 1, k - 1) * table.count(n - k), table.count(n))


def _block_polynomial(cycle_set: CycleSet, atoms: int, weight: int, free: int) -> Dict[int, int]:
    """
    q 个原子（总权重 w）与 t 个自由点组成一个循环：
    系数 (q−1)!·C(q+t−1, t)，要求 w + t ∈ A
    """
    base = math.factorial(atoms - 1)
    return {
        t: base * math.comb(atoms + t - 1, t)
        for t in range(free + 1)
        if cycle_set.contains(weight + t)
    }


def _poly_mul(first: Dict[int, int], second: Dict[int, int], bound: int) -> Dict[int, int]:
    product: Dict[int, int] = {}
    for i, x in first.items():
        for j, y in second.items():
            if i + j <= bound:
                product[i + j] = product.get(i + j, 0) + x * y
    return product


def compatible_count(
    table: CountTable,
    n: int,
    loops: Sequence[int],
    strings: Sequence[int],
) -> int:
    """
    |S_N^(A)(Γ)|：与单色可容许图 Γ 相容的置换个数

    环直接构成完整的循环；长度为 l 的串收缩为权重 l+1 的原子。
    对原子的每个集合划分，同块的原子与若干自由点组成一个循环，
    剩余自由点构成 S^(A) 中任意的置换。

    Args:
        table: A 的计数表，覆盖到 N
        n: N
        loops: 环长度
        strings: 串长度
    """
    cycle_set = table.cycle_set
    if not all(cycle_set.contains(length) for length in loops):
        return 0
    weights = [length + 1 for length in strings]
    free = n - sum(loops) - sum(weights)
    if free < 0:
        raise ValueError(f"图的顶点数超过 N={n}")

    if not weights:
        return table.count(free)

    total = 0
    for partition in iter_partitions(range(len(weights))):
        poly: Dict[int, int] = {0: 1}
        for block in partition.blocks:
            poly = _poly_mul(
                poly,
                _block_polynomial(cycle_set, len(block), sum(weights[i] for i in block), free),
                free,
            )
            if not poly:
                break
        total += sum(
            coefficient * math.perm(free, used) * table.count(free - used)
            for used, coefficient in poly.items()
        )
    return total


def p_graph(cycle_set: CycleSet, n: int, graph: ColoredGraph) -> Fraction:
    """
    p_N^(A)(Γ)：S_N^(A) 中均匀元素与嵌入 [N] 的单色图 Γ 相容的概率
    Γ 不是 A 图时为 0

    Raises:
        ValueError: 多色图，或顶点数超过 N
        InfeasibleSizeError: a_N = 0
    """
    if len(graph.colors()) > 1:
        raise ValueError("p_graph 只接受单色图")
    if graph.num_vertices > n:
        raise ValueError(f"图的顶点数 {graph.num_vertices} 超过 N={n}")
    table = count_table(cycle_set, n)
    table.require_nonempty(n)
    if not is_admissible(graph) or not is_a_graph(graph, cycle_set):
        return Fraction(0)
    loops, strings = loop_shape(graph)
    return Fraction(_compatible_count_cached(cycle_set, n, loops, strings), table.count(n))


@lru_cache(maxsize=4096)
def _compatible_count_cached(
    cycle_set: CycleSet, n: int, loops: Tuple[int, ...], strings: Tuple[int, ...],
) -> int:
    return compatible_count(count_table(cycle_set, n), n, loops, strings)


# ==================== 抽样 ====================

@dataclass(frozen=True)
class PermutationSample:
    """一行记法的置换：perm[i-1] = σ(i)"""

    n: int
    perm: Tuple[int, ...]

    @property
    def cycle_type(self) -> Tuple[int, ...]:
        return cycle_type(self.perm)

    def inverse(self) -> Tuple[int, ...]:
        inv = [0] * self.n
        for i, image in enumerate(self.perm, start=1):
            inv[image - 1] = i
        return tuple(inv)


@lru_cache(maxsize=8192)
def _cumulative_weights(
    cycle_set: CycleSet,
    n_max: int,
    m: int,
) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """
    剩 m 个点时，最小点所在循环长度 k 的累计权重 (m−1)!/(m−k)!·a_{m−k}
    所有 m 共用同一张 a_0..a_{n_max} 计数表
    """
    table = count_table(cycle_set, n_max)
    lengths, cumulative = [], []
    running = 0
    for k in cycle_set.members_upto(m):
        weight = math.perm(m - 1, k - 1) * table.count(m - k)
        if weight:
            running += weight
            lengths.append(k)
            cumulative.append(running)
    return tuple(lengths), tuple(cumulative)


def sample_permutation(table: CountTable, n: int, rng: random.Random) -> PermutationSample:
    """
    从 S_N^(A) 中精确均匀抽样

    以 p(剩余点数, k) 选出最小未放置点所在循环的长度 k，
    再均匀抽取有序的 k−1 个点补全该循环，对剩余点递归

    Raises:
        InfeasibleSizeError: a_N = 0
    """
    table.require_nonempty(n)
    cycle_set = table.cycle_set
    perm = [0] * n
    remaining = list(range(1, n + 1))
    while remaining:
        lengths, cumulative = _cumulative_weights(cycle_set, table.n_max, len(remaining))
        k = lengths[bisect_right(cumulative, rng.randrange(cumulative[-1]))]
        head = remaining[0]
        others = rng.sample(remaining[1:], k - 1)
        cycle = [head] + others
        for i, point in enumerate(cycle):
            perm[point - 1] = cycle[(i + 1) % k]
        chosen = set(cycle)
        remaining = [point for point in remaining if point not in chosen]
    return PermutationSample(n, tuple(perm))


def stream_rng(seed: int, stream: int) -> random.Random:
    """第 stream 条独立随机流：由 SeedSequence 派生种子"""
    state = np.random.SeedSequence(seed, spawn_key=(stream,)).generate_state(4, dtype=np.uint32)
    return random.Random(int.from_bytes(state.tobytes(), 'little'))


# ==================== 暴力枚举 ====================

def cycle_type(perm: Sequence[int]) -> Tuple[int, ...]:
    """一行记法置换的循环长度（升序）"""
    n = len(perm)
    seen = [False] * n
    lengths = []
    for start in range(n):
        if seen[start]:
            continue
        length = 0
        point = start
        while not seen[point]:
            seen[point] = True
            point = perm[point] - 1
            length += 1
        lengths.append(length)
    return tuple(sorted(lengths))


def iter_permutations(cycle_set: CycleSet, n: int) -> Iterator[Tuple[int, ...]]:
    """枚举 S_N^(A)（遍历 S_N 后过滤，仅用于小 N）"""
    for perm in itertools.permutations(range(1, n + 1)):
        if all(cycle_set.contains(length) for length in cycle_type(perm)):
            yield perm


def brute_count(cycle_set: CycleSet, n: int) -> int:
    return sum(1 for _ in iter_permutations(cycle_set, n))


# ==================== 可行网格与导出 ====================

def feasible_grid(
    cycle_sets: Sequence[CycleSet],
    lo: int,
    hi: int,
    points: int,
) -> Tuple[int, ...]:
    """
    在 [lo, hi] 中取约 points 个几何间隔的 N，
    每个 N 都是各 gcd(A_r) 的公倍数且对所有 A_r 有 a_N > 0

    Raises:
        ValueError: 区间非法
        InfeasibleSizeError: 区间内没有可行的 N
    """
    if lo < 1 or hi < lo or points < 1:
        raise ValueError(f"非法的网格参数: lo={lo}, hi={hi}, points={points}")
    step = math.lcm(*(cs.gcd for cs in cycle_sets)) if cycle_sets else 1

    def feasible(n: int) -> bool:
        return all(cs.is_nonempty(n) for cs in cycle_sets)

    grid = []
    for target in np.geomspace(lo, hi, points):
        # geomspace 的中间点可能带浮点误差，如 100.00000000000003
        n = max(lo, math.ceil(round(float(target), 6) / step) * step)
        while n <= hi and not feasible(n):
            n += step
        if n <= hi and n not in grid:
            grid.append(n)
    if not grid:
        raise InfeasibleSizeError(",".join(str(cs) for cs in cycle_sets), hi, "区间内没有可行的 N")
    return tuple(sorted(grid))


def count_table_csv(table: CountTable) -> str:
    """导出 N,a_N,t_N_numerator,t_N_denominator"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(["N", "a_N", "t_N_numerator", "t_N_denominator"])
    for n in range(table.n_max + 1):
        t = table.t(n)
        writer.writerow([n, table.count(n), t.numerator, t.denominator])
    return buffer.getvalue()

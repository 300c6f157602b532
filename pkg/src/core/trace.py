"""
单词迹的期望 E(∏_a tr U_{w_a})
U_r 为相互独立的置换矩阵，σ_r 在 S_N^(A_r) 上均匀分布

三种算法：
- brute: 遍历所有置换元组，作为精确的对照
- exact: 按同余求和的精确公式
    (1/N^n) Σ_{π∈Con(Γ)} N!/(N−|π|)! ∏_r p_N^(A_r)[(Γ/π)(r)]
  其中 Γ 是各单词图的不交并
- mc: 按种子分流的蒙特卡洛估计
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from multiprocessing import Pool
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from src.constants import (
    DEFAULT_BRUTE_BUDGET, DEFAULT_FREENESS_ENVELOPE, DEFAULT_SEED,
    DEFAULT_VERTEX_BOUND, METHOD_BRUTE, METHOD_EXACT, METHOD_MC, TRACE_METHODS,
    COVARIANCE_SLOPE_BOUND, RATE_SLOPE_BOUND, VERDICT_EXACT_ZERO,
    VERDICT_FAIL, VERDICT_PASS,
)
from src.core.asympt import slope_fit
from src.core.cyclecount import (
    CycleSet, count_table, iter_permutations, p_graph, sample_permutation,
    stream_rng,
)
from src.core.errors import BudgetExceededError, InfeasibleSizeError
from src.core.graphs import (
    ColoredGraph, disjoint_union, enumerate_congruences, quotient, word_graph,
)
from src.core.words import (
    Signature, Word, enumerate_words, format_word, is_identity, phi_haar,
    validate_word,
)
from src.utils.logger import get_logger, log_computation

logger = get_logger(__name__)


@dataclass(frozen=True)
class Model:
    """
    签名与各颜色的循环集合，要求 sup A_r = d_r

    Attributes:
        sig: 签名
        cycle_sets: A_1..A_s
    """

    sig: Signature
    cycle_sets: Tuple[CycleSet, ...]

    def __post_init__(self):
        if len(self.cycle_sets) != self.sig.s:
            raise ValueError(
                f"循环集合个数 {len(self.cycle_sets)} 与生成元个数 {self.sig.s} 不一致"
            )
        for color, cycle_set in enumerate(self.cycle_sets, start=1):
            if cycle_set.sup != self.sig.order(color):
                raise ValueError(
                    f"sup A_{color} = {cycle_set.sup} 与 d_{color} = {self.sig.order(color)} 不一致"
                )

    def cycle_set(self, color: int) -> CycleSet:
        return self.cycle_sets[color - 1]

    @property
    def singleton_or_infinite(self) -> bool:
        """每个 A_r 要么是单点集，要么是无限集"""
        return all(cs.is_singleton_or_infinite for cs in self.cycle_sets)

    def is_feasible(self, n: int) -> bool:
        return all(cs.is_nonempty(n) for cs in self.cycle_sets)

    def require_feasible(self, n: int) -> None:
        """
        Raises:
            InfeasibleSizeError: 某个 a_N^(A_r) = 0
        """
        for cycle_set in self.cycle_sets:
            if not cycle_set.is_nonempty(n):
                raise InfeasibleSizeError(str(cycle_set), n, f"gcd(A)={cycle_set.gcd}")

    def require_grid(self, grid: Sequence[int]) -> None:
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError(f"N 网格必须严格递增: {list(grid)}")
        for n in grid:
            self.require_feasible(n)


@dataclass(frozen=True)
class TraceReport:
    """
    一次迹期望计算的结果
    exact / brute 只有 value，mc 只有 estimate、stderr、samples、seed
    """

    words: Tuple[str, ...]
    n: int
    method: str
    value: Optional[Fraction] = None
    estimate: Optional[float] = None
    stderr: Optional[float] = None
    samples: Optional[int] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if self.method not in TRACE_METHODS:
            raise ValueError(f"未知的计算方式: {self.method!r}")
        if self.method == METHOD_MC and not (self.samples and self.samples > 0):
            raise ValueError("蒙特卡洛结果必须带有正的样本数")


class MonteCarloEstimate(NamedTuple):
    estimate: float
    stderr: float
    samples: int
    seed: int


# ==================== 置换矩阵乘积 ====================

def fixed_points(word: Word, perms: Dict[int, Tuple[int, ...]], inverses: Dict[int, Tuple[int, ...]]) -> int:
    """
    U_w 对应复合置换的不动点个数（tr U_w = fix / N）
    最右边的字母最先作用，g_r* 对应 σ_r 的逆
    """
    letters = list(reversed(word.letters))
    n = len(next(iter(perms.values())))
    count = 0
    for x in range(1, n + 1):
        y = x
        for letter in letters:
            table = inverses[letter.color] if letter.starred else perms[letter.color]
            y = table[y - 1]
        if y == x:
            count += 1
    return count


def _inverse(perm: Tuple[int, ...]) -> Tuple[int, ...]:
    inv = [0] * len(perm)
    for i, image in enumerate(perm, start=1):
        inv[image - 1] = i
    return tuple(inv)


def _prepare(model: Model, words: Sequence[Word], n: int) -> Tuple[List[Word], List[int]]:
    """校验单词与 N，返回非空单词及其用到的颜色"""
    for word in words:
        validate_word(word, model.sig)
    if n < 1:
        raise ValueError("N 必须是正整数")
    model.require_feasible(n)
    nonempty = [word for word in words if not word.is_empty]
    colors = sorted({letter.color for word in nonempty for letter in word.letters})
    return nonempty, colors


# ==================== 暴力对照 ====================

def brute_expected_trace(
    model: Model,
    words: Sequence[Word],
    n: int,
    budget: int = DEFAULT_BRUTE_BUDGET,
) -> Fraction:
    """
    遍历用到的颜色上的所有置换元组，精确求 E(∏ fix(σ_{w_a})/N)
    空单词的迹恒为 1

    Raises:
        BudgetExceededError: 元组个数超过预算
        InfeasibleSizeError: 某个 a_N^(A_r) = 0
    """
    nonempty, colors = _prepare(model, words, n)
    if not nonempty:
        return Fraction(1)

    size = math.prod(count_table(model.cycle_set(r), n).count(n) for r in colors)
    if size > budget:
        raise BudgetExceededError("暴力枚举的置换元组数", size, budget)
    log_computation(logger, "brute_expected_trace", size, f"N={n}")

    spaces = [list(iter_permutations(model.cycle_set(r), n)) for r in colors]
    total = 0
    for combo in itertools.product(*spaces):
        perms = dict(zip(colors, combo))
        inverses = {r: _inverse(perm) for r, perm in perms.items()}
        total += math.prod(fixed_points(word, perms, inverses) for word in nonempty)
    return Fraction(total, size * n ** len(nonempty))


# ==================== 精确公式 ====================

def _congruence_term(args: Tuple[ColoredGraph, Tuple[CycleSet, ...], Tuple[int, ...], int]) -> Fraction:
    """单个同余 π 的贡献 N!/(N−|π|)! ∏_r p_N^(A_r)[(Γ/π)(r)]"""
    graph, cycle_sets, colors, n = args
    if graph.num_vertices > n:
        return Fraction(0)
    term = Fraction(math.perm(n, graph.num_vertices))
    for color in colors:
        term *= p_graph(cycle_sets[color - 1], n, graph.monochrome(color))
        if term == 0:
            break
    return term


def exact_expected_trace(
    model: Model,
    words: Sequence[Word],
    n: int,
    vertex_bound: int = DEFAULT_VERTEX_BOUND,
    workers: int = 1,
) -> Fraction:
    """
    按同余求和公式精确计算 E(∏_a tr U_{w_a})
    |π| > N 的项为 0

    Raises:
        BudgetExceededError: 单词总长超过同余枚举的顶点上限
        InfeasibleSizeError: 某个 a_N^(A_r) = 0
    """
    nonempty, colors = _prepare(model, words, n)
    if not nonempty:
        return Fraction(1)

    graph = disjoint_union([word_graph(word) for word in nonempty])
    congruences = enumerate_congruences(graph, vertex_bound)
    jobs = [
        (quotient(graph, partition), model.cycle_sets, tuple(colors), n)
        for partition in congruences
    ]
    if workers > 1 and len(jobs) > 1:
        with Pool(processes=workers) as pool:
            terms = pool.map(_congruence_term, jobs)
    else:
        terms = [_congruence_term(job) for job in jobs]

    log_computation(logger, "exact_expected_trace", graph.num_vertices,
                    f"N={n}, congruences={len(congruences)}")
    return sum(terms, Fraction(0)) / n ** len(nonempty)


# ==================== 蒙特卡洛 ====================

def _mc_stream(args: Tuple[Model, Tuple[Word, ...], Tuple[int, ...], int, int, int, int]) -> Tuple[int, int]:
    """一条随机流：返回 ∏ fix 的精确和与平方和"""
    model, words, colors, n, samples, seed, stream = args
    rng = stream_rng(seed, stream)
    tables = {r: count_table(model.cycle_set(r), n) for r in colors}
    total, total_sq = 0, 0
    for _ in range(samples):
        perms, inverses = {}, {}
        for r in colors:
            sample = sample_permutation(tables[r], n, rng)
            perms[r] = sample.perm
            inverses[r] = sample.inverse()
        value = math.prod(fixed_points(word, perms, inverses) for word in words)
        total += value
        total_sq += value * value
    return total, total_sq


def mc_expected_trace(
    model: Model,
    words: Sequence[Word],
    n: int,
    samples: int,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> MonteCarloEstimate:
    """
    蒙特卡洛估计 E(∏ tr U_{w_a}) 及其标准误
    样本均分到 workers 条随机流，第 i 条流的种子由 (seed, i) 派生；
    结果只取决于 seed 与 workers

    Raises:
        ValueError: samples < 1
        InfeasibleSizeError: 某个 a_N^(A_r) = 0
    """
    if samples < 1:
        raise ValueError("样本数必须为正")
    nonempty, colors = _prepare(model, words, n)
    if not nonempty:
        return MonteCarloEstimate(1.0, 0.0 if samples > 1 else math.nan, samples, seed)

    streams = max(1, min(workers, samples))
    shares = [samples // streams + (1 if i < samples % streams else 0) for i in range(streams)]
    jobs = [
        (model, tuple(nonempty), tuple(colors), n, share, seed, i)
        for i, share in enumerate(shares)
    ]
    if streams > 1:
        with Pool(processes=streams) as pool:
            parts = pool.map(_mc_stream, jobs)
    else:
        parts = [_mc_stream(job) for job in jobs]

    total = sum(part[0] for part in parts)
    total_sq = sum(part[1] for part in parts)
    scale = n ** len(nonempty)
    mean = Fraction(total, samples * scale)
    if samples > 1:
        variance = Fraction(total_sq * samples - total * total, samples * (samples - 1) * scale * scale)
        stderr = math.sqrt(variance / samples)
    else:
        stderr = math.nan
    log_computation(logger, "mc_expected_trace", samples, f"N={n}, seed={seed}, streams={streams}")
    return MonteCarloEstimate(float(mean), stderr, samples, seed)


def expected_trace_report(
    model: Model,
    words: Sequence[Word],
    n: int,
    method: str = METHOD_EXACT,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    vertex_bound: int = DEFAULT_VERTEX_BOUND,
    budget: int = DEFAULT_BRUTE_BUDGET,
    workers: int = 1,
) -> TraceReport:
    """按 method 分派，包装成 TraceReport"""
    labels = tuple(format_word(word) for word in words)
    if method == METHOD_MC:
        result = mc_expected_trace(model, words, n, samples or 1,
                                   DEFAULT_SEED if seed is None else seed, workers)
        return TraceReport(labels, n, method, estimate=result.estimate,
                           stderr=result.stderr, samples=result.samples, seed=result.seed)
    if method == METHOD_EXACT:
        value = exact_expected_trace(model, words, n, vertex_bound, workers)
    elif method == METHOD_BRUTE:
        value = brute_expected_trace(model, words, n, budget)
    else:
        raise ValueError(f"未知的计算方式: {method!r}")
    return TraceReport(labels, n, method, value=value)


# ==================== 协方差与极限 ====================

def covariance_scan(
    model: Model,
    first: Word,
    second: Word,
    grid: Sequence[int],
    vertex_bound: int = DEFAULT_VERTEX_BOUND,
    workers: int = 1,
) -> List[Tuple[int, Fraction]]:
    """E(tr U_{w1} · tr U_{w2}) − E(tr U_{w1}) E(tr U_{w2})，每个 N 一行"""
    model.require_grid(grid)
    rows = []
    for n in grid:
        joint = exact_expected_trace(model, [first, second], n, vertex_bound, workers)
        one = exact_expected_trace(model, [first], n, vertex_bound, workers)
        two = exact_expected_trace(model, [second], n, vertex_bound, workers)
        rows.append((n, joint - one * two))
    return rows


def product_limit(words: Sequence[Word], sig: Signature) -> int:
    """N → ∞ 时 E(∏ tr U_{w_a}) 的极限：各 w_a ≈ e 时为 1，否则为 0"""
    return 1 if all(is_identity(word, sig) for word in words) else 0


def identity_words_are_constant(
    model: Model,
    word: Word,
    n: int,
    budget: int = DEFAULT_BRUTE_BUDGET,
) -> bool:
    """
    各 A_r 为单点集或无限集且 w ≈ e 时，每个置换元组都给出 U_w = I

    Raises:
        ValueError: 模型不满足单点或无限条件，或 w 不 ≈ e
        BudgetExceededError: 元组个数超过预算
    """
    if not model.singleton_or_infinite:
        raise ValueError("该性质要求每个 A_r 为单点集或无限集")
    if not is_identity(word, model.sig):
        raise ValueError(f"{format_word(word)} 不与 e 同余")
    nonempty, colors = _prepare(model, [word], n)
    if not nonempty:
        return True
    size = math.prod(count_table(model.cycle_set(r), n).count(n) for r in colors)
    if size > budget:
        raise BudgetExceededError("暴力枚举的置换元组数", size, budget)
    spaces = [list(iter_permutations(model.cycle_set(r), n)) for r in colors]
    for combo in itertools.product(*spaces):
        perms = dict(zip(colors, combo))
        inverses = {r: _inverse(perm) for r, perm in perms.items()}
        if fixed_points(word, perms, inverses) != n:
            return False
    return True


# ==================== 判定 ====================

def _fit_tail(grid: Sequence[int], values: Sequence[float]) -> Optional[float]:
    """用网格后一半（至少 3 个点）中非零的值拟合 log-log 斜率"""
    start = min(len(grid) // 2, max(len(grid) - 3, 0))
    points = [(n, v) for n, v in zip(grid[start:], values[start:]) if v > 0]
    if len(points) < 3:
        return None
    return slope_fit(points)


@dataclass
class FreenessReport:
    """渐近 * 自由性的判定报告"""

    grid: Tuple[int, ...]
    envelope: float
    max_deviation: Dict[int, float] = field(default_factory=dict)
    slopes: Dict[str, float] = field(default_factory=dict)
    exact_zero: List[str] = field(default_factory=list)
    rate_applies: bool = False
    verdict: str = VERDICT_FAIL

    @property
    def passed(self) -> bool:
        return self.verdict == VERDICT_PASS

    @property
    def slopes_within_rate(self) -> bool:
        return all(slope <= RATE_SLOPE_BOUND for slope in self.slopes.values())


def freeness_verdict(
    model: Model,
    max_word_len: int,
    grid: Sequence[int],
    envelope: float = DEFAULT_FREENESS_ENVELOPE,
    vertex_bound: int = DEFAULT_VERTEX_BOUND,
    workers: int = 1,
) -> FreenessReport:
    """
    对长度不超过 max_word_len 的每个非空单词，比较 E(tr U_w) 与 φ(u_w)
    每个 N 上要求 N · max|E tr U_w − φ(u_w)| ≤ envelope
    w 不 ≈ e 时拟合 |E tr U_w| 的衰减斜率，恒为 0 的单词单独列出
    各 A_r 为单点集或无限集时 O(1/N) 速率成立，PASS 还要求所有斜率 ≤ RATE_SLOPE_BOUND；
    其他情形斜率仅供参考
    """
    grid = tuple(grid)
    model.require_grid(grid)
    words = [word for word in enumerate_words(model.sig, max_word_len) if not word.is_empty]
    report = FreenessReport(grid, envelope, rate_applies=model.singleton_or_infinite)

    deviations = {n: 0.0 for n in grid}
    for word in words:
        phi = phi_haar(word, model.sig)
        values = [exact_expected_trace(model, [word], n, vertex_bound, workers) for n in grid]
        for n, value in zip(grid, values):
            deviations[n] = max(deviations[n], float(abs(value - phi)))
        if phi == 0:
            label = format_word(word)
            if all(value == 0 for value in values):
                report.exact_zero.append(label)
            else:
                slope = _fit_tail(grid, [float(abs(v)) for v in values])
                if slope is not None:
                    report.slopes[label] = slope

    report.max_deviation = deviations
    passed = all(n * deviations[n] <= envelope for n in grid)
    if report.rate_applies:
        passed = passed and report.slopes_within_rate
    report.verdict = VERDICT_PASS if passed else VERDICT_FAIL
    logger.info(f"freeness: {len(words)} 个单词, N={list(grid)}, {report.verdict}")
    return report


@dataclass
class SummabilityReport:
    """协方差可和性（几乎必然收敛的充分条件）的判定报告"""

    rows: List[Tuple[int, Fraction]]
    slope: Optional[float]
    bound: float
    verdict: str


def summability_verdict(
    model: Model,
    first: Word,
    second: Word,
    grid: Sequence[int],
    bound: float = COVARIANCE_SLOPE_BOUND,
    vertex_bound: int = DEFAULT_VERTEX_BOUND,
    workers: int = 1,
) -> SummabilityReport:
    """协方差衰减斜率 ≤ bound 时 PASS；协方差恒为 0 时 EXACT_ZERO"""
    rows = covariance_scan(model, first, second, grid, vertex_bound, workers)
    if all(value == 0 for _, value in rows):
        return SummabilityReport(rows, None, bound, VERDICT_EXACT_ZERO)
    slope = _fit_tail([n for n, _ in rows], [float(abs(v)) for _, v in rows])
    verdict = VERDICT_PASS if slope is not None and slope <= bound else VERDICT_FAIL
    return SummabilityReport(rows, slope, bound, verdict)

"""
渐近规律的数值诊断
全部从精确计数表出发，只在最后一步通过分子、分母的对数转换为浮点数
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.constants import (
    DEFAULT_COUNT_CAP, FINITE_RATIO_TOLERANCE, HILDEBRAND_MIN_N,
    HILDEBRAND_TOLERANCE, INFINITE_RATIO_TOLERANCE, INFINITY, LAW_COUNTEREXAMPLE,
    LAW_HAYMAN, LAW_HILDEBRAND, LAW_LIMPNG, LAW_LIMPNK, LAW_MULTIPLES,
    MULTIPLES_RATIO_TOLERANCE, SINGLETON_RATIO_TOLERANCE, TREND_SLACK, VERDICT_EXACT_ZERO,
    VERDICT_FAIL, VERDICT_NOT_FOUND, VERDICT_PASS,
)
from src.core.cyclecount import (
    CountTable, CycleSet, count_table, iter_counts, p_cycle, p_graph,
)
from src.core.graphs import ColoredGraph, is_a_graph, loop_shape
from src.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass
class AsymptoticReport:
    """
    一条渐近规律在 N 网格上的诊断结果
    ratio = observed / predicted
    """

    law: str
    grid: Tuple[int, ...]
    observed: List[float] = field(default_factory=list)
    predicted: List[float] = field(default_factory=list)
    ratios: List[float] = field(default_factory=list)
    verdict: str = VERDICT_FAIL
    exponent: Optional[float] = None
    fitted_exponent: Optional[float] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict in (VERDICT_PASS, VERDICT_EXACT_ZERO)

    def rows(self) -> List[Tuple[int, float, float, float]]:
        """CSV 行 N,observed,predicted,ratio"""
        return list(zip(self.grid, self.observed, self.predicted, self.ratios))


def slope_fit(points: Sequence[Tuple[float, float]]) -> float:
    """
    log y 对 log x 的最小二乘斜率

    Raises:
        ValueError: 点数少于 3，或存在非正的 x、y
    """
    if len(points) < 3:
        raise ValueError("斜率拟合至少需要 3 个点")
    xs = np.array([float(x) for x, _ in points])
    ys = np.array([float(y) for _, y in points])
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("斜率拟合要求 x、y 均为正")
    slope, _ = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope)


def _log_fraction(value: Fraction) -> float:
    return math.log(value.numerator) - math.log(value.denominator)


def _log_t(table: CountTable, n: int) -> float:
    """log(a_N / N!)"""
    return math.log(table.count(n)) - math.log(math.factorial(n))


def _trend_verdict(ratios: Sequence[float], tolerance: float) -> str:
    """
    后三分之一的平均偏差不超过前三分之一，且最后一个比值在容差内
    """
    deviations = [abs(r - 1.0) for r in ratios]
    third = max(1, len(deviations) // 3)
    head = sum(deviations[:third]) / third
    tail = sum(deviations[-third:]) / third
    return VERDICT_PASS if tail <= head + TREND_SLACK and deviations[-1] <= tolerance else VERDICT_FAIL


def _validate_grid(grid: Sequence[int]) -> Tuple[int, ...]:
    grid = tuple(grid)
    if not grid:
        raise ValueError("N 网格不能为空")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError(f"N 网格必须严格递增: {list(grid)}")
    return grid


def _require_feasible(table: CountTable, grid: Sequence[int]) -> None:
    for n in grid:
        table.require_nonempty(n)


def _ratio_tolerance(cycle_set: CycleSet) -> float:
    if cycle_set.is_finite:
        return FINITE_RATIO_TOLERANCE
    if cycle_set.is_complement_finite:
        return INFINITE_RATIO_TOLERANCE
    return MULTIPLES_RATIO_TOLERANCE


def _fit_or_none(grid: Sequence[int], values: Sequence[float]) -> Optional[float]:
    points = [(n, v) for n, v in zip(grid, values) if v > 0]
    return slope_fit(points) if len(points) >= 3 else None


def _power_ratio(
    law: str,
    grid: Tuple[int, ...],
    values: Sequence[Fraction],
    exponent: float,
    tolerance: float,
) -> AsymptoticReport:
    """observed = values，predicted = N^exponent"""
    report = AsymptoticReport(law, grid, exponent=exponent)
    for n, value in zip(grid, values):
        log_observed = _log_fraction(value)
        log_predicted = exponent * math.log(n)
        report.observed.append(math.exp(log_observed))
        report.predicted.append(math.exp(log_predicted))
        report.ratios.append(math.exp(log_observed - log_predicted))
    report.fitted_exponent = _fit_or_none(grid, report.observed)
    report.verdict = _trend_verdict(report.ratios, tolerance)
    report.details["tolerance"] = tolerance
    return report


# ==================== 循环概率与图概率 ====================

def limpnk_diagnostic(
    cycle_set: CycleSet,
    k: int,
    grid: Sequence[int],
    tolerance: Optional[float] = None,
) -> AsymptoticReport:
    """
    p_N^(A)(k) ~ N^{k/d − 1}，d = sup A，k/∞ 记为 0

    Raises:
        ValueError: k ∉ A
        InfeasibleSizeError: 网格中存在 a_N = 0
    """
    grid = _validate_grid(grid)
    if not cycle_set.contains(k):
        raise ValueError(f"k={k} 不在 {cycle_set} 中")
    table = count_table(cycle_set, grid[-1])
    _require_feasible(table, grid)
    d = cycle_set.sup
    exponent = (0.0 if d == INFINITY else k / d) - 1.0
    values = [p_cycle(table, n, k) for n in grid]
    tolerance = _ratio_tolerance(cycle_set) if tolerance is None else tolerance
    report = _power_ratio(LAW_LIMPNK, grid, values, exponent, tolerance)
    report.details.update({"cycle_set": str(cycle_set), "k": k})
    return report


def graph_exponent(graph: ColoredGraph, cycle_set: CycleSet) -> float:
    """−E + L + Σ_loops (l/d − 1)"""
    loops, _ = loop_shape(graph)
    d = cycle_set.sup
    correction = sum((0.0 if d == INFINITY else length / d) - 1.0 for length in loops)
    return -graph.num_edges + len(loops) + correction


def limpng_diagnostic(
    cycle_set: CycleSet,
    graph: ColoredGraph,
    grid: Sequence[int],
    tolerance: Optional[float] = None,
) -> AsymptoticReport:
    """
    A 图 Γ 的相容概率 p_N^(A)(Γ) ~ N^{−E+L+Σ_loops(l/d−1)}
    Γ 不是 A 图时概率恒为 0，结论记为 EXACT_ZERO
    """
    grid = _validate_grid(grid)
    table = count_table(cycle_set, grid[-1])
    _require_feasible(table, grid)
    if not is_a_graph(graph, cycle_set):
        report = AsymptoticReport(LAW_LIMPNG, grid, verdict=VERDICT_EXACT_ZERO)
        report.observed = [0.0] * len(grid)
        report.details["reason"] = f"不是 {cycle_set} 图"
        return report
    exponent = graph_exponent(graph, cycle_set)
    values = [p_graph(cycle_set, n, graph) for n in grid]
    tolerance = _ratio_tolerance(cycle_set) if tolerance is None else tolerance
    report = _power_ratio(LAW_LIMPNG, grid, values, exponent, tolerance)
    report.details["cycle_set"] = str(cycle_set)
    return report


# ==================== 系数比值 ====================

def hayman_ratio_check(
    cycle_set: CycleSet,
    grid: Sequence[int],
    tolerance: Optional[float] = None,
) -> AsymptoticReport:
    """
    有限 A，D = gcd(A)，k_n = max A，b_m = t_{Dm}：
        b_{m−1} / b_m ~ (mD)^{D/k_n}
    网格的元素是 m。单点集 A = {k} 时比值精确为 1，容差收紧为 1%

    Raises:
        ValueError: A 不是有限集，或网格含 m < 1
        InfeasibleSizeError: 某个 t_{Dm} = 0
    """
    if not cycle_set.is_finite:
        raise ValueError("Hayman 比值检验只适用于有限的 A")
    grid = _validate_grid(grid)
    if grid[0] < 1:
        raise ValueError("Hayman 网格中的 m 必须 ≥ 1")
    step = cycle_set.gcd
    top = cycle_set.sup
    table = count_table(cycle_set, step * grid[-1])
    for m in grid:
        table.require_nonempty(step * m)
        table.require_nonempty(step * (m - 1))

    singleton = len(cycle_set.values) == 1
    if tolerance is None:
        tolerance = SINGLETON_RATIO_TOLERANCE if singleton else FINITE_RATIO_TOLERANCE

    exponent = step / top
    report = AsymptoticReport(LAW_HAYMAN, grid, exponent=exponent)
    for m in grid:
        log_observed = _log_t(table, step * (m - 1)) - _log_t(table, step * m)
        log_predicted = exponent * math.log(m * step)
        report.observed.append(math.exp(log_observed))
        report.predicted.append(math.exp(log_predicted))
        report.ratios.append(math.exp(log_observed - log_predicted))
    report.fitted_exponent = _fit_or_none(grid, report.observed)
    report.verdict = _trend_verdict(report.ratios, tolerance)
    report.details.update({
        "cycle_set": str(cycle_set), "D": step, "singleton": singleton, "tolerance": tolerance,
    })
    return report


def hildebrand_limit(
    cycle_set: CycleSet,
    grid: Sequence[int],
    tolerance: float = HILDEBRAND_TOLERANCE,
) -> AsymptoticReport:
    """
    A 为 All 或 cofinite 时 t_N → exp(−Σ_{j∉A} 1/j)
    最大的 N 至少为 HILDEBRAND_MIN_N 且误差 < tolerance 时 PASS

    Raises:
        ValueError: A 的补集不是有限集
    """
    if not cycle_set.is_complement_finite:
        raise ValueError("Hildebrand 极限只适用于 All 或 cofinite 的 A")
    grid = _validate_grid(grid)
    table = count_table(cycle_set, grid[-1])
    limit = math.exp(-float(cycle_set.complement_sum()))

    report = AsymptoticReport(LAW_HILDEBRAND, grid)
    errors = []
    for n in grid:
        t = table.t(n)
        report.observed.append(float(t))
        report.predicted.append(limit)
        report.ratios.append(float(t) / limit)
        errors.append(abs(float(t) - limit))
    passed = grid[-1] >= HILDEBRAND_MIN_N and errors[-1] < tolerance
    report.verdict = VERDICT_PASS if passed else VERDICT_FAIL
    report.details.update({
        "cycle_set": str(cycle_set), "limit": limit, "errors": errors, "tolerance": tolerance,
    })
    return report


# ==================== 倍数集合与反例 ====================

def rising_closed_form(step: int, n: int) -> Fraction:
    """(1/N!)·(1/D)(1/D+1)⋯(1/D+N−1)"""
    base = Fraction(1, step)
    product = Fraction(1)
    for i in range(n):
        product *= base + i
    return product / math.factorial(n)


def multiples_report(step: int, n_max: int) -> AsymptoticReport:
    """
    A = {D, 2D, 3D, ...}：
    - t_{DN} 与升阶乘闭式逐项精确比较（N ≤ n_max）
    - p_{DN}(D) · DN → 1 的趋势

    Raises:
        ValueError: D < 1 或 n_max < 1
    """
    if step < 1 or n_max < 1:
        raise ValueError("multiples 诊断要求 D ≥ 1 且 N_max ≥ 1")
    cycle_set = CycleSet.multiples(step)
    table = count_table(cycle_set, step * n_max)
    mismatches = [n for n in range(n_max + 1) if table.t(step * n) != rising_closed_form(step, n)]

    grid = tuple(step * n for n in range(1, n_max + 1))
    values = [p_cycle(table, big_n, step) * big_n for big_n in grid]
    report = AsymptoticReport(LAW_MULTIPLES, grid, exponent=-1.0)
    report.observed = [float(v) for v in values]
    report.predicted = [1.0] * len(grid)
    report.ratios = list(report.observed)
    trend = _trend_verdict(report.ratios, MULTIPLES_RATIO_TOLERANCE)
    exact = not mismatches
    report.verdict = VERDICT_PASS if exact and trend == VERDICT_PASS else VERDICT_FAIL
    report.details.update({
        "D": step, "exact_match": exact, "mismatches": mismatches[:10], "trend": trend,
    })
    if mismatches:
        logger.warning(f"multiples:{step} 闭式不一致: N={mismatches[:10]}")
    return report


def multiples_closed_form(step: int, n_max: int) -> bool:
    """闭式精确相等且 p_{DN}(D)·DN 趋于 1"""
    return multiples_report(step, n_max).verdict == VERDICT_PASS


@dataclass(frozen=True)
class CounterexampleStage:
    """
    反例序列的一步：在 A_k 下找到的 N_{k+1} 及 N·p_N^(A_k)(1)
    搜索上限内没找到时 n 与 product 为 None
    """

    stage: int
    cycle_set: str
    n: Optional[int]
    product: Optional[float]
    verdict: str


def _first_exceeding(cycle_set: CycleSet, after: int, cap: int) -> Optional[Tuple[int, float]]:
    """最小的 N > after（N ≤ cap）使 N·a_{N−1} > 2·a_N"""
    previous = None
    for n, a_n in enumerate(itertools.islice(iter_counts(cycle_set), cap + 1)):
        if n > after and a_n > 0 and n * previous > 2 * a_n:
            return n, math.exp(math.log(n) + math.log(previous) - math.log(a_n))
        previous = a_n
    return None


def counterexample_sequence(k_max: int, cap: int = DEFAULT_COUNT_CAP) -> List[CounterexampleStage]:
    """
    逐步构造 N_1 < N_2 < ...：
    A_0 = {1}，A_k = {1, N_1+1, ..., N_k+1}，
    N_{k+1} 为大于 N_k 且满足 N·p_N^(A_k)(1) > 2 的最小 N，
    说明 p_N^(A)(1) 不满足 ~ 1/N

    达到 cap 仍未找到时该步记为 NOT_FOUND 并停止

    Raises:
        ValueError: k_max < 1
    """
    if k_max < 1:
        raise ValueError("k_max 必须 ≥ 1")
    stages: List[CounterexampleStage] = []
    members = [1]
    last = 0
    for stage in range(k_max):
        cycle_set = CycleSet.finite(members)
        found = _first_exceeding(cycle_set, last, cap)
        if found is None:
            stages.append(CounterexampleStage(stage, str(cycle_set), None, None, VERDICT_NOT_FOUND))
            logger.info(f"counterexample: 第 {stage} 步在 N ≤ {cap} 内未找到")
            break
        n, product = found
        stages.append(CounterexampleStage(stage, str(cycle_set), n, product, VERDICT_PASS))
        members.append(n + 1)
        last = n
    return stages


def counterexample_report(k_max: int, cap: int = DEFAULT_COUNT_CAP) -> AsymptoticReport:
    """把反例序列整理为报告：至少两步找到即 PASS"""
    stages = counterexample_sequence(k_max, cap)
    found = [s for s in stages if s.n is not None]
    report = AsymptoticReport(LAW_COUNTEREXAMPLE, tuple(s.n for s in found))
    report.observed = [s.product for s in found]
    report.predicted = [2.0] * len(found)
    report.ratios = [s.product / 2.0 for s in found]
    report.verdict = VERDICT_PASS if len(found) >= 2 else VERDICT_FAIL
    report.details.update({
        "cap": cap,
        "stages": [
            {"stage": s.stage, "cycle_set": s.cycle_set, "N": s.n, "verdict": s.verdict}
            for s in stages
        ],
    })
    return report

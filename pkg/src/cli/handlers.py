"""
子命令处理器
每个 cmd_* 接收解析好的参数，向标准输出写机器可读的结果，返回退出码
诊断信息只写标准错误
"""

import argparse
import math
import sys
from typing import Dict, List, Optional, Sequence, TextIO, Tuple

from src.cli.messages import (
    ASYMPT_COLUMNS, COUNT_COLUMNS, COVARIANCE_COLUMNS, FREENESS_COLUMNS,
    SCON_COLUMNS, TRACE_COLUMNS, WORD_COLUMNS, Row,
    asympt_rows, asympt_summary, count_rows, covariance_rows, freeness_rows,
    freeness_summary, json_row, render_rows, render_summary,
    summability_summary, trace_row,
    get_budget_error_message, get_comparison_mismatch_message,
    get_empty_class_warning, get_infeasible_message, get_usage_error_message,
    get_verification_failed_message,
)
from src.constants import (
    DEFAULT_FREENESS_ENVELOPE, DEFAULT_GRID_POINTS, DEFAULT_MC_SAMPLES,
    EXIT_BUDGET, EXIT_FAIL, EXIT_OK, EXIT_USAGE, HILDEBRAND_TOLERANCE,
    LAW_COUNTEREXAMPLE, LAW_HAYMAN, LAW_HILDEBRAND, LAW_LIMPNG, LAW_LIMPNK,
    LAW_MULTIPLES, METHOD_BRUTE, METHOD_EXACT, METHOD_MC, VERDICT_EXACT_ZERO,
    VERDICT_FAIL, VERDICT_PASS,
)
from src.core.asympt import (
    AsymptoticReport, counterexample_report, hayman_ratio_check,
    hildebrand_limit, limpng_diagnostic, limpnk_diagnostic, multiples_report,
)
from src.core.cyclecount import (
    CycleSet, count_table, egf_crosscheck, feasible_grid, parse_cycle_set,
)
from src.core.errors import BudgetExceededError, InfeasibleSizeError
from src.core.graphs import graph_from_shape, strong_congruences_chi1, word_graph
from src.core.partitions import bell_number, format_partition
from src.core.trace import (
    Model, TraceReport, expected_trace_report, freeness_verdict,
    summability_verdict,
)
from src.core.words import (
    Signature, Word, format_signature, format_word, is_identity,
    is_identity_by_rotation, normal_form, parse_signature, parse_word,
    phi_haar, validate_word,
)
from src.db.database import Database
from src.utils.config import Config
from src.utils.logger import get_logger
from src.utils.validators import (
    parse_grid, split_cycle_sets, split_words, validate_format,
    validate_non_negative, validate_positive,
)

logger = get_logger(__name__)

# 蒙特卡洛估计与精确值的允许偏差（以标准误计）
MC_AGREEMENT_SIGMAS = 5.0


def vertex_bound_for_budget(budget: int, ceiling: int) -> int:
    """
    Bell(n) ≤ budget 的最大 n，且不超过 ceiling
    同余个数以 Bell 数为上界，--budget 因此同时约束同余枚举
    """
    n = 0
    while n < ceiling and bell_number(n + 1) <= budget:
        n += 1
    return n


def parse_lengths(text: Optional[str]) -> List[int]:
    """逗号分隔的正整数列表，空串或 None 为空列表"""
    if not text:
        return []
    try:
        return [validate_positive(int(item), "长度") for item in text.split(',') if item.strip()]
    except ValueError as e:
        raise ValueError(f"无法解析的长度列表 {text!r}: {e}") from None


class CommandHandlers:
    """命令行子命令处理器"""

    def __init__(
        self,
        config: Config,
        out: Optional[TextIO] = None,
        err: Optional[TextIO] = None,
        db: Optional[Database] = None,
    ):
        """
        初始化处理器

        Args:
            config: 配置实例
            out: 机器输出流，默认标准输出
            err: 诊断输出流，默认标准错误
            db: 结果归档数据库，None 表示不归档
        """
        self.config = config
        self.out = out or sys.stdout
        self.err = err or sys.stderr
        self.db = db

        self.fmt = config.default_format
        self.workers = config.default_workers
        self.seed = config.default_seed
        self.brute_budget = config.brute_budget
        self.vertex_bound = config.vertex_bound

        self._run_id: Optional[int] = None
        self._verdict: Optional[str] = None

    # ==================== 分派 ====================

    def run(self, args: argparse.Namespace) -> int:
        """
        执行一个子命令，把异常映射为退出码

        Returns:
            0 成功或 PASS，1 校验未通过，2 参数错误，3 超出预算或规模不可行
        """
        handler = getattr(self, f"cmd_{args.command}")
        self._verdict = None
        self._start_archive(args)
        try:
            self._apply_overrides(args)
            code = handler(args)
        except BudgetExceededError as e:
            self._diagnose(get_budget_error_message(e))
            code = EXIT_BUDGET
        except InfeasibleSizeError as e:
            self._diagnose(get_infeasible_message(e))
            code = EXIT_BUDGET
        except ValueError as e:
            self._diagnose(get_usage_error_message(e))
            code = EXIT_USAGE
        self._finish_archive(code)
        return code

    def _apply_overrides(self, args: argparse.Namespace) -> None:
        """命令行参数覆盖配置"""
        fmt = getattr(args, 'format', None) or self.config.default_format
        if not validate_format(fmt):
            raise ValueError(f"未知的输出格式: {fmt!r}")
        self.fmt = fmt

        workers = getattr(args, 'workers', None)
        self.workers = validate_positive(
            self.config.default_workers if workers is None else workers, "--workers"
        )
        seed = getattr(args, 'seed', None)
        self.seed = self.config.default_seed if seed is None else seed

        budget = getattr(args, 'budget', None)
        if budget is None:
            self.brute_budget = self.config.brute_budget
            self.vertex_bound = self.config.vertex_bound
        else:
            self.brute_budget = validate_positive(budget, "--budget")
            self.vertex_bound = vertex_bound_for_budget(budget, self.config.vertex_bound)
        logger.debug(
            f"settings: format={self.fmt}, workers={self.workers}, seed={self.seed}, "
            f"brute_budget={self.brute_budget}, vertex_bound={self.vertex_bound}"
        )

    # ==================== 输出与归档 ====================

    def _emit(self, rows: Sequence[Row], columns: Sequence[str]) -> None:
        self.out.write(render_rows(rows, self.fmt, columns))
        self._archive_rows(rows)

    def _emit_summary(self, summary: Row) -> None:
        self.out.write(render_summary(summary, self.fmt))
        self._archive_rows([summary])
        self._verdict = summary.get("verdict")

    def _diagnose(self, message: str) -> None:
        self.err.write(message + "\n")

    def _verdict_exit(self, command: str, verdict: str) -> int:
        if verdict in (VERDICT_PASS, VERDICT_EXACT_ZERO):
            return EXIT_OK
        self._diagnose(get_verification_failed_message(command, verdict))
        return EXIT_FAIL

    def _start_archive(self, args: argparse.Namespace) -> None:
        self._run_id = None
        if self.db is None:
            return
        arguments = {k: v for k, v in vars(args).items() if k != 'config'}
        run = self.db.create_run(args.command, arguments)
        if run is not None:
            self._run_id = run.id

    def _archive_rows(self, rows: Sequence[Row]) -> None:
        if self._run_id is not None:
            self.db.add_rows(self._run_id, [json_row(row) for row in rows])

    def _finish_archive(self, code: int) -> None:
        if self._run_id is not None:
            self.db.finish_run(self._run_id, code, self._verdict)
            logger.info(f"Run archived: id={self._run_id}, exit_code={code}")

    # ==================== 参数解析 ====================

    @staticmethod
    def _signature_and_word(sig_text: str, word_text: str) -> Tuple[Signature, Word]:
        sig = parse_signature(sig_text)
        word = parse_word(word_text)
        validate_word(word, sig)
        return sig, word

    @staticmethod
    def _model(args: argparse.Namespace) -> Model:
        sig = parse_signature(args.sig)
        cycle_sets = tuple(parse_cycle_set(text) for text in split_cycle_sets(args.sets))
        return Model(sig, cycle_sets)

    @staticmethod
    def _words(text: str, sig: Signature) -> List[Word]:
        words = [parse_word(part) for part in split_words(text)]
        for word in words:
            validate_word(word, sig)
        return words

    @staticmethod
    def _grid(text: str, cycle_sets: Sequence[CycleSet]) -> Tuple[int, ...]:
        """
        区间自动取可行的 N；显式列表逐个检查可行性

        Raises:
            InfeasibleSizeError: 列表中某个 N 使 a_N^(A_r) = 0，或区间内没有可行的 N
        """
        kind, values = parse_grid(text)
        if kind == "range":
            lo, hi, points = values
            return feasible_grid(cycle_sets, lo, hi, points or DEFAULT_GRID_POINTS)
        for n in values:
            for cycle_set in cycle_sets:
                if not cycle_set.is_nonempty(n):
                    raise InfeasibleSizeError(str(cycle_set), n, f"gcd(A)={cycle_set.gcd}")
        return tuple(values)

    # ==================== count ====================

    def cmd_count(self, args: argparse.Namespace) -> int:
        """a_N 与 t_N 表，--egf-check 时用指数生成函数独立校验"""
        cycle_set = parse_cycle_set(args.set)
        n_max = validate_non_negative(args.n, "--n")
        table = count_table(cycle_set, n_max)
        logger.info(f"count: A={cycle_set}, N_max={n_max}")

        if table.count(n_max) == 0:
            self._diagnose(get_empty_class_warning(str(cycle_set), n_max))
        self._emit(count_rows(table), COUNT_COLUMNS)

        if not args.egf_check:
            return EXIT_OK
        passed = egf_crosscheck(cycle_set, n_max, self.config.series_bound)
        verdict = VERDICT_PASS if passed else VERDICT_FAIL
        self._emit_summary({
            "check": "egf", "set": str(cycle_set), "N_max": n_max, "verdict": verdict,
        })
        return self._verdict_exit("count --egf-check", verdict)

    # ==================== wordcheck ====================

    def cmd_wordcheck(self, args: argparse.Namespace) -> int:
        """规范形、w ≈ e 与 φ(u_w)；旋转刻画作为交叉检验"""
        sig, word = self._signature_and_word(args.sig, args.word)
        identity = is_identity(word, sig)
        rotation_agrees: Optional[bool]
        try:
            rotation_agrees = is_identity_by_rotation(word, sig) == identity
        except BudgetExceededError as e:
            logger.warning(f"wordcheck: 跳过旋转刻画交叉检验: {e}")
            rotation_agrees = None
        self._emit([{
            "word": format_word(word),
            "signature": format_signature(sig),
            "normal_form": format_word(normal_form(word, sig)),
            "identity": identity,
            "phi": phi_haar(word, sig),
            "rotation_check": rotation_agrees,
        }], WORD_COLUMNS)
        if rotation_agrees is False:
            logger.error(f"wordcheck: 规范形与旋转刻画不一致: {word}")
            return EXIT_FAIL
        return EXIT_OK

    # ==================== scon ====================

    def cmd_scon(self, args: argparse.Namespace) -> int:
        """单词图上 χ = 1 的强同余个数，--verify 时与 φ(u_w) 比较"""
        sig, word = self._signature_and_word(args.sig, args.word)
        graph = word_graph(word)
        partitions = strong_congruences_chi1(graph, sig, self.vertex_bound)
        self._emit([{
            "word": format_word(word),
            "signature": format_signature(sig),
            "vertices": graph.num_vertices,
            "count": len(partitions),
            "partition": format_partition(partitions[0]) if partitions else None,
        }], SCON_COLUMNS)

        if not args.verify:
            return EXIT_OK
        phi = phi_haar(word, sig)
        verdict = VERDICT_PASS if phi == len(partitions) else VERDICT_FAIL
        self._emit_summary({"check": "phi", "count": len(partitions), "phi": phi, "verdict": verdict})
        return self._verdict_exit("scon --verify", verdict)

    # ==================== trace ====================

    def _trace_report(self, model: Model, words: Sequence[Word], n: int, method: str,
                      samples: int) -> TraceReport:
        return expected_trace_report(
            model, words, n, method,
            samples=samples, seed=self.seed, vertex_bound=self.vertex_bound,
            budget=self.brute_budget, workers=self.workers,
        )

    def cmd_trace(self, args: argparse.Namespace) -> int:
        """E(∏ tr U_w)，--compare 时用全部可行的方式计算并核对"""
        model = self._model(args)
        words = self._words(args.words, model.sig)
        if args.n is not None:
            n = validate_positive(args.n, "--n")
            model.require_feasible(n)
            grid: Tuple[int, ...] = (n,)
        else:
            grid = self._grid(args.grid, model.cycle_sets)
        samples = validate_positive(args.samples or DEFAULT_MC_SAMPLES, "--samples")

        if args.compare:
            return self._compare(model, words, grid, samples)
        rows = [trace_row(self._trace_report(model, words, n, args.method, samples)) for n in grid]
        self._emit(rows, TRACE_COLUMNS)
        return EXIT_OK

    def _compare(self, model: Model, words: Sequence[Word], grid: Sequence[int], samples: int) -> int:
        """
        exact 与 brute 必须精确相等，mc 须落在精确值的若干个标准误之内
        brute 超出预算的 N 跳过暴力枚举
        """
        rows: List[Row] = []
        mismatches: List[Dict[str, object]] = []
        for n in grid:
            exact = self._trace_report(model, words, n, METHOD_EXACT, samples)
            rows.append(trace_row(exact))
            try:
                brute = self._trace_report(model, words, n, METHOD_BRUTE, samples)
            except BudgetExceededError as e:
                logger.warning(f"compare: N={n} 跳过暴力枚举: {e}")
            else:
                rows.append(trace_row(brute))
                if brute.value != exact.value:
                    self._diagnose(get_comparison_mismatch_message(n, METHOD_EXACT, METHOD_BRUTE))
                    mismatches.append({"N": n, "method": METHOD_BRUTE})

            mc = self._trace_report(model, words, n, METHOD_MC, samples)
            rows.append(trace_row(mc))
            if not math.isnan(mc.stderr):
                gap = abs(mc.estimate - float(exact.value))
                if gap > MC_AGREEMENT_SIGMAS * mc.stderr + 1e-12:
                    self._diagnose(get_comparison_mismatch_message(n, METHOD_EXACT, METHOD_MC))
                    mismatches.append({"N": n, "method": METHOD_MC})

        self._emit(rows, TRACE_COLUMNS)
        verdict = VERDICT_FAIL if mismatches else VERDICT_PASS
        self._emit_summary({"check": "compare", "mismatches": mismatches, "verdict": verdict})
        return self._verdict_exit("trace --compare", verdict)

    # ==================== verify / covariance ====================

    def cmd_verify(self, args: argparse.Namespace) -> int:
        """短单词上的渐近 * 自由性判定"""
        model = self._model(args)
        grid = self._grid(args.grid, model.cycle_sets)
        max_len = validate_positive(args.max_len, "--max-len")
        envelope = DEFAULT_FREENESS_ENVELOPE if args.tolerance is None else args.tolerance
        report = freeness_verdict(model, max_len, grid, envelope, self.vertex_bound, self.workers)
        self._emit(freeness_rows(report), FREENESS_COLUMNS)
        self._emit_summary(freeness_summary(report))
        return self._verdict_exit("verify", report.verdict)

    def cmd_covariance(self, args: argparse.Namespace) -> int:
        """Cov(tr U_{w1}, tr U_{w2}) 的网格扫描与可和性判定"""
        model = self._model(args)
        first = self._words(args.word1, model.sig)[0]
        second = self._words(args.word2, model.sig)[0]
        grid = self._grid(args.grid, model.cycle_sets)
        report = summability_verdict(
            model, first, second, grid,
            vertex_bound=self.vertex_bound, workers=self.workers,
        )
        self._emit(covariance_rows(report), COVARIANCE_COLUMNS)
        self._emit_summary(summability_summary(report))
        return self._verdict_exit("covariance", report.verdict)

    # ==================== asympt ====================

    def cmd_asympt(self, args: argparse.Namespace) -> int:
        """按 law 分派到对应的渐近诊断"""
        report = self._asympt_report(args)
        self._emit(asympt_rows(report), ASYMPT_COLUMNS)
        self._emit_summary(asympt_summary(report))
        return self._verdict_exit(f"asympt {args.law}", report.verdict)

    def _asympt_report(self, args: argparse.Namespace) -> AsymptoticReport:
        law = args.law
        if law == LAW_MULTIPLES:
            return multiples_report(validate_positive(args.d, "--d"), validate_positive(args.n, "--n"))
        if law == LAW_COUNTEREXAMPLE:
            cap = self.config.count_cap if args.cap is None else validate_positive(args.cap, "--cap")
            return counterexample_report(validate_positive(args.k_max, "--k-max"), cap)

        cycle_set = parse_cycle_set(args.set)
        if law == LAW_HAYMAN:
            # 网格的元素是 m，N = D·m
            kind, values = parse_grid(args.grid)
            if kind == "range":
                lo, hi, points = values
                grid = feasible_grid([], lo, hi, points or DEFAULT_GRID_POINTS)
            else:
                grid = tuple(values)
            return hayman_ratio_check(cycle_set, grid, args.tolerance)

        grid = self._grid(args.grid, [cycle_set])
        if law == LAW_LIMPNK:
            return limpnk_diagnostic(cycle_set, validate_positive(args.k, "--k"), grid, args.tolerance)
        if law == LAW_LIMPNG:
            graph = graph_from_shape(parse_lengths(args.loops), parse_lengths(args.strings))
            return limpng_diagnostic(cycle_set, graph, grid, args.tolerance)
        if law == LAW_HILDEBRAND:
            tolerance = HILDEBRAND_TOLERANCE if args.tolerance is None else args.tolerance
            return hildebrand_limit(cycle_set, grid, tolerance)
        raise ValueError(f"未知的渐近规律: {law!r}")

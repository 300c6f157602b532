"""
命令行输出模板
标准输出：JSON 行（键排序）或 CSV；有理数一律写成 "p/q"
标准错误：诊断文案
"""

import csv
import io
import json
import math
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence

from src.constants import FORMAT_CSV
from src.core.asympt import AsymptoticReport
from src.core.cyclecount import CountTable
from src.core.errors import BudgetExceededError, InfeasibleSizeError
from src.core.trace import FreenessReport, SummabilityReport, TraceReport

Row = Dict[str, Any]

COUNT_COLUMNS = ["N", "a_N", "t_N_numerator", "t_N_denominator"]
WORD_COLUMNS = ["word", "signature", "normal_form", "identity", "phi", "rotation_check"]
SCON_COLUMNS = ["word", "signature", "vertices", "count", "partition"]
TRACE_COLUMNS = ["words", "N", "method", "value_num", "value_den",
                 "estimate", "stderr", "samples", "seed"]
ASYMPT_COLUMNS = ["N", "observed", "predicted", "ratio"]
FREENESS_COLUMNS = ["N", "max_deviation", "scaled_deviation"]
COVARIANCE_COLUMNS = ["N", "covariance_num", "covariance_den", "covariance"]


def format_fraction(value: Fraction) -> str:
    """整数写成 "p"，其余写成 "p/q" """
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    if isinstance(value, Fraction):
        return format_fraction(value)
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, Fraction):
        return format_fraction(value)
    if isinstance(value, float) and math.isnan(value):
        return None
    if isinstance(value, dict):
        return {k: _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    return value


def json_row(row: Row) -> Row:
    """转换为可直接 json.dumps 的字典，省略值为 None 的键"""
    return {k: _json_value(v) for k, v in row.items() if v is not None}


def render_rows(rows: Iterable[Row], fmt: str, columns: Sequence[str]) -> str:
    """
    渲染输出行

    Args:
        rows: 行字典
        fmt: json 或 csv
        columns: CSV 的列（json 模式下输出整行，省略值为 None 的键）
    """
    rows = list(rows)
    if fmt == FORMAT_CSV:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(column)) for column in columns])
        return buffer.getvalue()
    return "".join(
        json.dumps(json_row(row), sort_keys=True, ensure_ascii=False) + "\n"
        for row in rows
    )


def render_summary(summary: Row, fmt: str) -> str:
    """判定摘要：json 模式下为普通的一行，csv 模式下以 "# " 开头"""
    line = json.dumps(_json_value(summary), sort_keys=True, ensure_ascii=False)
    return f"# {line}\n" if fmt == FORMAT_CSV else f"{line}\n"


# ==================== 行构造 ====================

def count_rows(table: CountTable) -> List[Row]:
    rows = []
    for n in range(table.n_max + 1):
        t = table.t(n)
        rows.append({
            "N": n,
            "a_N": table.count(n),
            "t_N": t,
            "t_N_numerator": t.numerator,
            "t_N_denominator": t.denominator,
        })
    return rows


def trace_row(report: TraceReport) -> Row:
    row: Row = {
        "words": "; ".join(report.words),
        "N": report.n,
        "method": report.method,
    }
    if report.value is not None:
        row.update({
            "value": report.value,
            "value_num": report.value.numerator,
            "value_den": report.value.denominator,
        })
    else:
        row.update({
            "estimate": report.estimate,
            "stderr": report.stderr,
            "samples": report.samples,
            "seed": report.seed,
        })
    return row


def asympt_rows(report: AsymptoticReport) -> List[Row]:
    return [
        {"N": n, "observed": observed, "predicted": predicted, "ratio": ratio}
        for n, observed, predicted, ratio in report.rows()
    ]


def asympt_summary(report: AsymptoticReport) -> Row:
    summary: Row = {"law": report.law, "verdict": report.verdict, "grid": list(report.grid)}
    if report.exponent is not None:
        summary["exponent"] = report.exponent
    if report.fitted_exponent is not None:
        summary["fitted_exponent"] = report.fitted_exponent
    summary.update(report.details)
    return summary


def freeness_rows(report: FreenessReport) -> List[Row]:
    return [
        {"N": n, "max_deviation": report.max_deviation[n],
         "scaled_deviation": n * report.max_deviation[n]}
        for n in report.grid
    ]


def freeness_summary(report: FreenessReport) -> Row:
    return {
        "verdict": report.verdict,
        "envelope": report.envelope,
        "slopes": dict(sorted(report.slopes.items())),
        "slopes_within_rate": report.slopes_within_rate,
        "rate_applies": report.rate_applies,
        "exact_zero": sorted(report.exact_zero),
    }


def covariance_rows(report: SummabilityReport) -> List[Row]:
    return [
        {"N": n, "covariance": float(value), "covariance_num": value.numerator,
         "covariance_den": value.denominator, "covariance_exact": value}
        for n, value in report.rows
    ]


def summability_summary(report: SummabilityReport) -> Row:
    return {"verdict": report.verdict, "slope": report.slope, "bound": report.bound}


# ==================== 诊断文案 ====================

def get_usage_error_message(error: Exception) -> str:
    return f"❌ 参数错误：{error}"


def get_budget_error_message(error: BudgetExceededError) -> str:
    return f"⚠️ 超出预算：{error}\n可以用 --budget 或配置项 limits.* 放宽上限"


def get_infeasible_message(error: InfeasibleSizeError) -> str:
    return f"⚠️ 规模不可行：{error}"


def get_verification_failed_message(command: str, verdict: Optional[str]) -> str:
    return f"❌ {command} 校验未通过（{verdict}）"


def get_empty_class_warning(cycle_set: str, n: int) -> str:
    return f"⚠️ a_{n} = 0：A = {cycle_set} 下不存在 {n} 阶置换，t_{n} 记为 0"


def get_comparison_mismatch_message(n: int, first: str, second: str) -> str:
    return f"❌ N={n} 时 {first} 与 {second} 的结果不一致"

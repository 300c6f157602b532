#!/usr/bin/env python3
"""
permfree - 命令行入口

受限循环长度的随机置换矩阵：计数、单词判定、强同余、迹期望与渐近诊断
机器输出（JSON 行或 CSV）写标准输出，日志与诊断写标准错误

用法示例：
    python main.py count --set cofinite:1 --n 5
    python main.py wordcheck --sig inf,inf --word "g1 g2 g1* g2*"
    python main.py trace exact --sig inf --sets all --words "g1" --n 5
    python main.py asympt multiples --d 2 --n 50
"""

import argparse
import sys
from typing import List, Optional, TextIO

from src.cli.handlers import CommandHandlers
from src.constants import (
    EXIT_USAGE, LAW_COUNTEREXAMPLE, LAW_HAYMAN, LAW_HILDEBRAND, LAW_LIMPNG,
    LAW_LIMPNK, LAW_MULTIPLES, METHOD_EXACT, OUTPUT_FORMATS, TRACE_METHODS,
)
from src.db.database import get_database
from src.utils.config import get_config, reset_config
from src.utils.logger import setup_logger


def _common_options() -> argparse.ArgumentParser:
    """所有子命令共用的参数"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', default=None, help='配置文件路径（默认读取项目根目录的 config.json）')
    common.add_argument('--format', choices=OUTPUT_FORMATS, default=None, help='输出格式')
    common.add_argument('--workers', type=int, default=None, help='并行进程数')
    common.add_argument('--seed', type=int, default=None, help='随机种子')
    common.add_argument('--budget', type=int, default=None,
                        help='同时限制暴力枚举的元组个数与同余枚举的 Bell 数')
    common.add_argument('--store', action='store_true', help='把本次运行写入结果归档')
    return common


def _model_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--sig', required=True, help='签名，如 "2,inf"')
    parser.add_argument('--sets', required=True, help='各颜色的循环集合，如 "finite:2,all"')


def build_parser() -> argparse.ArgumentParser:
    """构造命令行解析器"""
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog='permfree',
        description='受限循环长度随机置换矩阵的单词迹矩（精确有理数运算）',
    )
    commands = parser.add_subparsers(dest='command', required=True)

    # count
    count = commands.add_parser('count', parents=[common], help='a_N 与 t_N = a_N/N! 表')
    count.add_argument('--set', required=True, help='循环集合，如 all、finite:1,3、cofinite:1、multiples:2')
    count.add_argument('--n', type=int, required=True, help='N_max')
    count.add_argument('--egf-check', action='store_true', help='用指数生成函数独立校验')

    # wordcheck
    wordcheck = commands.add_parser('wordcheck', parents=[common], help='规范形、w ≈ e 与 φ(u_w)')
    wordcheck.add_argument('--sig', required=True)
    wordcheck.add_argument('--word', required=True, help='如 "g1 g2 g1* g2*"，e 表示空单词')

    # scon
    scon = commands.add_parser('scon', parents=[common], help='单词图上 χ = 1 的强同余')
    scon.add_argument('--sig', required=True)
    scon.add_argument('--word', required=True)
    scon.add_argument('--verify', action='store_true', help='与 φ(u_w) 交叉检验')

    # trace
    trace = commands.add_parser('trace', parents=[common], help='E(∏ tr U_w)')
    trace.add_argument('method', nargs='?', choices=TRACE_METHODS, default=METHOD_EXACT)
    _model_options(trace)
    trace.add_argument('--words', required=True, help='以 ";" 分隔的单词')
    size = trace.add_mutually_exclusive_group(required=True)
    size.add_argument('--n', type=int, help='单个 N')
    size.add_argument('--grid', help='N 网格："50,100,200" 或 "lo..hi[:points]"')
    trace.add_argument('--samples', type=int, default=None, help='蒙特卡洛样本数')
    trace.add_argument('--compare', action='store_true', help='全部可行方式计算并核对')

    # verify
    verify = commands.add_parser('verify', parents=[common], help='渐近 * 自由性判定')
    _model_options(verify)
    verify.add_argument('--max-len', type=int, required=True)
    verify.add_argument('--grid', required=True)
    verify.add_argument('--tolerance', type=float, default=None, help='包络常数 C（|偏差| ≤ C/N）')

    # covariance
    covariance = commands.add_parser('covariance', parents=[common], help='迹的协方差与可和性')
    _model_options(covariance)
    covariance.add_argument('--word1', required=True)
    covariance.add_argument('--word2', required=True)
    covariance.add_argument('--grid', required=True)

    # asympt
    asympt = commands.add_parser('asympt', help='渐近规律诊断')
    laws = asympt.add_subparsers(dest='law', required=True)

    limpnk = laws.add_parser(LAW_LIMPNK, parents=[common], help='p_N(k) ~ N^{k/d-1}')
    limpnk.add_argument('--set', required=True)
    limpnk.add_argument('--k', type=int, required=True)
    limpnk.add_argument('--grid', required=True)
    limpnk.add_argument('--tolerance', type=float, default=None)

    limpng = laws.add_parser(LAW_LIMPNG, parents=[common], help='单色图的相容概率')
    limpng.add_argument('--set', required=True)
    limpng.add_argument('--loops', default='', help='环长列表，如 "2,1"')
    limpng.add_argument('--strings', default='', help='串长列表，如 "1"')
    limpng.add_argument('--grid', required=True)
    limpng.add_argument('--tolerance', type=float, default=None)

    hayman = laws.add_parser(LAW_HAYMAN, parents=[common], help='有限 A 的系数比值')
    hayman.add_argument('--set', required=True)
    hayman.add_argument('--grid', required=True, help='m 的网格（N = D·m）')
    hayman.add_argument('--tolerance', type=float, default=None)

    hildebrand = laws.add_parser(LAW_HILDEBRAND, parents=[common], help='cofinite A 的 t_N 极限')
    hildebrand.add_argument('--set', required=True)
    hildebrand.add_argument('--grid', required=True)
    hildebrand.add_argument('--tolerance', type=float, default=None)

    multiples = laws.add_parser(LAW_MULTIPLES, parents=[common], help='A = D 的倍数')
    multiples.add_argument('--d', type=int, required=True)
    multiples.add_argument('--n', type=int, required=True)

    counterexample = laws.add_parser(LAW_COUNTEREXAMPLE, parents=[common],
                                     help='p_N(1) 不满足 ~ 1/N 的反例序列')
    counterexample.add_argument('--k-max', type=int, required=True)
    counterexample.add_argument('--cap', type=int, default=None)

    return parser


def main(argv: Optional[List[str]] = None, out: Optional[TextIO] = None,
         err: Optional[TextIO] = None) -> int:
    """
    主函数

    Returns:
        退出码
    """
    err = err or sys.stderr

    # 1. 解析参数
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else 0

    # 2. 加载配置
    reset_config()
    try:
        config = get_config(args.config)
    except FileNotFoundError as e:
        err.write(f"错误：{e}\n")
        return EXIT_USAGE
    except ValueError as e:
        err.write(f"配置加载失败：{e}\n")
        return EXIT_USAGE

    # 3. 设置日志
    logger = setup_logger(level=config.log_level, log_file=config.log_file)
    logger.debug(f"permfree {args.command} starting")

    # 4. 结果归档（可选）
    db = None
    if args.store or config.archive_enabled:
        db = get_database(config.db_path, config.default_timezone)
        db.init_db()

    # 5. 执行子命令
    handlers = CommandHandlers(config, out=out, err=err, db=db)
    return handlers.run(args)


if __name__ == "__main__":
    sys.exit(main())

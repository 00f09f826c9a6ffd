"""
命令行入口模块

该模块负责命令行参数解析与命令分派，包括：
- 全局参数（--config、--seed、--out、--quick、--payoff、--rho、--workers、--log-level）
- 子命令 sweep-rho、paths、table、hist、payoff-plot、density
- 日志初始化与退出码

退出码：0 成功，1 未预期的错误，2 配置或参数错误，3 数值计算失败。

作者: QVHedge 开发团队
版本: 1.0.0
"""

import argparse
import sys
from typing import List, Optional, Sequence

from ..core.config import Config
from ..core.exceptions import ConfigError, ExperimentCancelled, NumericalError, ParameterError
from ..core.experiment_config import load_experiment_config
from ..core.payoffs import available_presets
from ..utils.logger import logger, setup_logger
from . import commands

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _rho_list(text: str) -> List[float]:
    try:
        values = [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"无效的相关系数列表: {text}") from e
    if not values:
        raise argparse.ArgumentTypeError("相关系数列表不能为空")
    return values


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"种子必须是64位无符号整数: {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    """构造参数解析器，全局参数可放在子命令之后"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="实验配置 JSON 文件")
    common.add_argument("--seed", type=_seed, help="随机种子（覆盖配置）")
    common.add_argument("--out", help="输出目录（覆盖配置）")
    common.add_argument("--quick", action="store_true",
                        help=f"小规模运行: dt=1/{round(1 / Config.QUICK_DT)}, {Config.QUICK_N_PATHS} 条路径")
    common.add_argument("--payoff", help=f"预设收益（{', '.join(available_presets())}）或收益 JSON 文件")
    common.add_argument("--rho", type=_rho_list, help="逗号分隔的相关系数列表，如 --rho=-0.99,0.99")
    common.add_argument("--workers", type=int, help="路径级并行线程数")
    common.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="日志级别")

    parser = argparse.ArgumentParser(
        prog="qvhedge",
        description="Heston 模型下二次变差衍生品的定价与对冲实验",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {Config.APP_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep-rho", parents=[common], help="初始价格随 ρ 的变化")
    sweep.add_argument("--points", type=int, default=Config.SWEEP_POINTS, help="ρ 网格点数")

    paths = sub.add_parser("paths", parents=[common], help="样本路径上的组合轨迹")
    paths.add_argument("--path-id", type=int, default=0, help="路径编号")

    sub.add_parser("table", parents=[common], help="对冲误差统计表")

    hist = sub.add_parser("hist", parents=[common], help="对冲误差直方图")
    hist.add_argument("--bins", type=int, help="分箱数")

    sub.add_parser("payoff-plot", parents=[common], help="近似收益与目标收益对比")

    density = sub.add_parser("density", parents=[common], help="二次变差密度")
    density.add_argument("--upper", type=float, default=Config.DENSITY_PLOT_UPPER, help="网格上限")
    density.add_argument("--points", type=int, default=Config.DENSITY_PLOT_POINTS, help="网格点数")

    return parser


def _join_option_values(argv: Sequence[str]) -> List[str]:
    """
    把 "--rho -0.5,0.5" 合并为 "--rho=-0.5,0.5"

    以负号开头且含逗号的值会被 argparse 当成选项。
    """
    joined: List[str] = []
    items = list(argv)
    i = 0
    while i < len(items):
        item = items[i]
        if item == "--rho" and i + 1 < len(items):
            joined.append(f"--rho={items[i + 1]}")
            i += 2
            continue
        joined.append(item)
        i += 1
    return joined


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """解析命令行参数，argv 为 None 时读取 sys.argv[1:]"""
    if argv is None:
        argv = sys.argv[1:]
    return build_parser().parse_args(_join_option_values(argv))


def run(args: argparse.Namespace) -> commands.CommandResult:
    """按解析后的参数加载配置并执行命令"""
    overrides = {
        "quick": args.quick,
        "seed": args.seed,
        "workers": args.workers,
        "out": args.out,
        "payoff": args.payoff,
        "rho": args.rho,
    }
    config = load_experiment_config(args.config, overrides)
    setup_logger(config.outputs.directory, args.log_level)
    logger.info(f"执行命令 {args.command}，输出目录: {config.outputs.directory}")

    if args.command == "sweep-rho":
        return commands.cmd_sweep_rho(config, args.points)
    if args.command == "paths":
        return commands.cmd_paths(config, args.path_id)
    if args.command == "table":
        return commands.cmd_table(config)
    if args.command == "hist":
        return commands.cmd_hist(config, args.bins)
    if args.command == "payoff-plot":
        return commands.cmd_payoff_plot(config)
    return commands.cmd_density(config, args.upper, args.points)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    命令行主函数

    Args:
        argv: 参数列表，None 表示 sys.argv[1:]

    Returns:
        int: 退出码
    """
    args = parse_args(argv)
    setup_logger(level=args.log_level)

    ok, errors = Config.validate_config()
    if not ok:
        for message in errors:
            logger.error(f"配置参数验证失败: {message}")
        return EXIT_CONFIG

    try:
        result = run(args)
    except ConfigError as e:
        for message in e.errors:
            logger.error(f"配置错误: {message}")
        return EXIT_CONFIG
    except ParameterError as e:
        logger.error(f"参数错误: {e}")
        return EXIT_CONFIG
    except NumericalError as e:
        logger.error(f"数值计算失败: {e}")
        return EXIT_NUMERICAL
    except ExperimentCancelled as e:
        logger.warning(str(e))
        return EXIT_UNEXPECTED
    except KeyboardInterrupt:
        logger.warning("用户中断")
        return EXIT_UNEXPECTED
    except Exception as e:
        logger.exception(f"未预期的错误: {e}")
        return EXIT_UNEXPECTED

    logger.info(f"命令 {result.command} 完成，共写出 {len(result.files)} 个文件")
    return EXIT_OK

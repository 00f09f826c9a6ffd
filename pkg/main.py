#!/usr/bin/env python3
"""
QVHedge - 主程序入口

Heston 模型下二次变差衍生品的定价与对冲实验命令行工具。

主要命令：
- sweep-rho: 初始价格随相关系数的变化
- paths: 样本路径上的组合轨迹
- table: 对冲误差统计表
- hist: 对冲误差直方图
- payoff-plot: 近似收益与目标收益对比
- density: 二次变差密度

作者: QVHedge 开发团队
版本: 1.0.0
"""

import os
import sys
from typing import Optional, Sequence

# 添加项目目录到Python路径，以便导入模块
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.cli.app import main as cli_main  # noqa: E402


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    主程序入口函数

    Args:
        argv: 命令行参数，None 表示 sys.argv[1:]

    Returns:
        int: 退出码
    """
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())

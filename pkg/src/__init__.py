"""
QVHedge - 二次变差衍生品的定价与对冲实验

在 Heston 随机波动率模型下，对已实现二次变差的收益进行定价，
并用基本复制组合与相关性免疫组合进行动态对冲，通过蒙特卡洛模拟
度量对冲误差。

作者: QVHedge 开发团队
版本号: 1.0.0
"""

__version__ = "1.0.0"
__author__ = "QVHedge 开发团队"

from .core.config import Config
from .core.heston_model import HestonParams, MarketState
from .core.payoffs import PayoffSpec, preset_payoff
from .core.mc_engine import SimConfig, hedge_experiment
from .core.stats import summarize

__all__ = [
    "Config",
    "HestonParams",
    "MarketState",
    "PayoffSpec",
    "preset_payoff",
    "SimConfig",
    "hedge_experiment",
    "summarize",
    "__version__",
    "__author__",
]

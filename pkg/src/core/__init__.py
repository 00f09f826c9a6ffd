"""
核心模块

包含全局配置、Heston 模型、Carr-Lee 对冲组合、收益构造、
蒙特卡洛引擎和统计功能。
"""

from .config import Config
from .exceptions import (ConfigError, DegenerateRootError, DensityInversionError, ExperimentCancelled,
                         NumericalError, NumericalOverflowError, ParameterError, QVHedgeError)

__all__ = [
    "Config",
    "QVHedgeError",
    "ParameterError",
    "ConfigError",
    "NumericalError",
    "NumericalOverflowError",
    "DegenerateRootError",
    "DensityInversionError",
    "ExperimentCancelled",
]

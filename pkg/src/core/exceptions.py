"""
异常定义模块

该模块集中定义了应用程序使用的异常类型，负责：
- 参数与配置校验失败
- 数值计算失败（溢出、退化根、密度反演不收敛）
- 实验取消

CLI 根据异常类型决定退出码：配置/参数错误为 2，数值错误为 3。

作者: QVHedge 开发团队
版本: 1.0.0
"""

from typing import Iterable, List, Optional


class QVHedgeError(Exception):
    """应用程序异常基类"""


class ParameterError(QVHedgeError, ValueError):
    """模型、模拟或收益参数无效"""


class ConfigError(QVHedgeError):
    """
    实验配置文档错误

    Attributes:
        errors: "字段路径: 错误信息" 形式的错误列表
    """

    def __init__(self, errors: Iterable[str]):
        self.errors: List[str] = list(errors)
        super().__init__("; ".join(self.errors) or "配置无效")


class NumericalError(QVHedgeError, ArithmeticError):
    """数值计算失败基类"""


class NumericalOverflowError(NumericalError):
    """特征函数或组合价值计算中出现非有限值"""

    def __init__(self, message: str, argument: Optional[complex] = None,
                 tau: Optional[float] = None):
        self.argument = argument
        self.tau = tau
        details = []
        if argument is not None:
            details.append(f"参数={argument}")
        if tau is not None:
            details.append(f"τ={tau}")
        if details:
            message = f"{message} ({', '.join(details)})"
        super().__init__(message)


class DegenerateRootError(NumericalError):
    """变换参数 s = i/8 时 u⁺ 与 u⁻ 重合，免疫权重无定义"""

    def __init__(self, s: complex):
        self.s = s
        super().__init__(f"s={s} 处 u⁺(s) = u⁻(s)，免疫权重不存在")


class DensityInversionError(NumericalError):
    """二次变差密度反演未收敛"""

    def __init__(self, frequency_limit: float, tail_ratio: float):
        self.frequency_limit = frequency_limit
        self.tail_ratio = tail_ratio
        super().__init__(
            f"密度反演未收敛: 截断频率={frequency_limit:g}, 尾部比例={tail_ratio:.3e}"
        )


class ExperimentCancelled(QVHedgeError):
    """实验在运行中被取消"""

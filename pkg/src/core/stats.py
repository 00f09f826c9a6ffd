"""
统计模块

该模块负责对冲误差的汇总统计与直方图，包括：
- 三种策略的样本均值与样本标准差（N-1 归一化）
- 原始与实部两种统计口径
- 共享分箱的概率直方图
- 按 ρ 排列的误差表及其文本渲染

主要类与函数：
- Convention / StrategySummary / ErrorSummary
- summarize / histogram / shared_histograms
- error_table / render_table_text / format_sci

作者: QVHedge 开发团队
版本: 1.0.0
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .exceptions import ParameterError
from .payoffs import PayoffSpec, is_real_decreasing

STRATEGIES = ("plus", "minus", "immunized")


class Convention(str, Enum):
    """统计口径：raw 直接使用复误差，real-part 先对 ε± 取实部"""
    RAW = "raw"
    REAL_PART = "real-part"


@dataclass(frozen=True)
class StrategySummary:
    mean: complex
    std: float
    n: int


@dataclass(frozen=True)
class ErrorSummary:
    """三种策略的误差统计"""
    plus: StrategySummary
    minus: StrategySummary
    immunized: StrategySummary
    convention: Convention = Convention.RAW

    @property
    def n(self) -> int:
        return self.immunized.n

    def strategy(self, name: str) -> StrategySummary:
        if name not in STRATEGIES:
            raise ParameterError(f"未知策略: {name}")
        return getattr(self, name)

    def to_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {"convention": self.convention.value, "n": self.n}
        for name in STRATEGIES:
            summary = self.strategy(name)
            result[name] = {
                "mean_re": summary.mean.real,
                "mean_im": summary.mean.imag,
                "std": summary.std,
            }
        return result


def default_convention(payoff: PayoffSpec) -> Convention:
    """实系数递减指数收益使用实部口径，其余使用原始口径"""
    return Convention.REAL_PART if is_real_decreasing(payoff) else Convention.RAW


def _as_columns(errors: Any) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    if hasattr(errors, "eps_plus"):
        return (np.asarray(errors.eps_plus, dtype=complex),
                np.asarray(errors.eps_minus, dtype=complex),
                np.asarray(errors.eps_imm, dtype=complex))
    array = np.asarray(list(errors), dtype=complex)
    if array.ndim != 2 or array.shape[1] != 3:
        raise ParameterError("误差样本必须是 (ε⁺, ε⁻, ε) 三元组序列")
    return array[:, 0], array[:, 1], array[:, 2]


def _summarize_one(samples: np.ndarray) -> StrategySummary:
    """两遍算法：先求均值，再求离差平方和；math.fsum 使结果与顺序无关"""
    n = samples.size
    mean = complex(math.fsum(samples.real) / n, math.fsum(samples.imag) / n)
    deviation = samples - mean
    squares = deviation.real * deviation.real + deviation.imag * deviation.imag
    variance = math.fsum(squares) / (n - 1)
    return StrategySummary(mean=mean, std=math.sqrt(variance), n=n)


def summarize(errors: Any, convention: Union[Convention, str] = Convention.RAW) -> ErrorSummary:
    """
    汇总三种策略的对冲误差

    Args:
        errors: HedgeErrors 或 (ε⁺, ε⁻, ε) 三元组序列
        convention: raw 或 real-part

    Returns:
        ErrorSummary: 误差统计
    """
    convention = Convention(convention)
    plus, minus, immunized = _as_columns(errors)
    if immunized.size < 2:
        raise ParameterError(f"至少需要2个样本才能计算样本方差，当前: {immunized.size}")
    if convention is Convention.REAL_PART:
        plus = plus.real.astype(complex)
        minus = minus.real.astype(complex)
    return ErrorSummary(
        plus=_summarize_one(plus),
        minus=_summarize_one(minus),
        immunized=_summarize_one(immunized),
        convention=convention,
    )


def histogram(samples: Sequence[float], bin_count: int,
              value_range: Optional[Tuple[float, float]] = None) -> List[Tuple[float, float]]:
    """
    概率直方图

    Args:
        samples: 实数样本
        bin_count: 分箱数
        value_range: 分箱范围，None 表示样本的 [min, max]

    Returns:
        List[Tuple[float, float]]: (箱中心, 概率)
    """
    values = np.asarray(samples, dtype=float).ravel()
    if values.size == 0:
        raise ParameterError("直方图样本不能为空")
    if bin_count < 1:
        raise ParameterError(f"分箱数必须至少为1，当前值: {bin_count}")
    low, high = value_range if value_range is not None else (values.min(), values.max())
    if high <= low:
        # 退化范围：全部质量落在一个箱
        return [(float(low), 1.0)]
    counts, edges = np.histogram(values, bins=int(bin_count), range=(float(low), float(high)))
    centers = 0.5 * (edges[:-1] + edges[1:])
    probabilities = counts / values.size
    return list(zip(centers.tolist(), probabilities.tolist()))


def shared_histograms(samples_by_strategy: Mapping[str, Sequence[float]], bin_count: int) -> pd.DataFrame:
    """
    多个策略共享分箱的直方图

    Args:
        samples_by_strategy: 策略名到实数样本
        bin_count: 分箱数

    Returns:
        pd.DataFrame: bin_center 列与每个策略的概率列
    """
    if not samples_by_strategy:
        raise ParameterError("至少需要一个策略的样本")
    pooled = np.concatenate([np.asarray(v, dtype=float).ravel() for v in samples_by_strategy.values()])
    if pooled.size == 0:
        raise ParameterError("直方图样本不能为空")
    value_range = (float(pooled.min()), float(pooled.max()))

    frame = None
    for name, values in samples_by_strategy.items():
        rows = histogram(values, bin_count, value_range)
        column = pd.DataFrame(rows, columns=["bin_center", name])
        frame = column if frame is None else frame.merge(column, on="bin_center", how="outer")
    return frame.sort_values("bin_center").reset_index(drop=True)


def format_sci(value: float) -> str:
    """三位有效数字的科学计数法，例如 3.10E-04"""
    return f"{value:.2E}"


def _row_labels(convention: Convention) -> List[Tuple[str, str, str]]:
    prefix = "Re " if convention is Convention.REAL_PART else ""
    return [
        (f"{prefix}eps_minus", "minus", "mean"),
        ("eps_imm", "immunized", "mean"),
        (f"{prefix}eps_plus", "plus", "mean"),
        ("sigma_minus", "minus", "std"),
        ("sigma_imm", "immunized", "std"),
        ("sigma_plus", "plus", "std"),
    ]


def rho_column(rho: float) -> str:
    return f"rho={rho:+.2f}"


def error_table(summaries_by_rho: Mapping[float, ErrorSummary]) -> pd.DataFrame:
    """
    按 ρ 排列的误差表：行为均值与标准差，列为相关系数

    均值取实部；复数均值的虚部保留在 JSON 摘要中。

    Args:
        summaries_by_rho: 相关系数到误差统计

    Returns:
        pd.DataFrame: 以行标签为索引的表
    """
    if not summaries_by_rho:
        raise ParameterError("误差表至少需要一个相关系数")
    conventions = {s.convention for s in summaries_by_rho.values()}
    convention = conventions.pop() if len(conventions) == 1 else Convention.RAW

    data = {}
    for rho, summary in summaries_by_rho.items():
        column = []
        for _, strategy, statistic in _row_labels(convention):
            value = getattr(summary.strategy(strategy), statistic)
            column.append(float(value.real) if statistic == "mean" else float(value))
        data[rho_column(rho)] = column
    index = [label for label, _, _ in _row_labels(convention)]
    return pd.DataFrame(data, index=pd.Index(index, name="statistic"))


def render_table_text(table: pd.DataFrame) -> str:
    """对齐的文本表格"""
    header = [table.index.name or ""] + list(table.columns)
    rows = [[str(label)] + [format_sci(v) for v in table.loc[label]] for label in table.index]
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    lines = ["  ".join(cell.rjust(widths[i]) if i else cell.ljust(widths[i])
                       for i, cell in enumerate(line)) for line in [header] + rows]
    return "\n".join(lines) + "\n"

"""
收益构造模块

该模块负责构造二次变差的收益函数 φ(v) = Σ a_k e^{is_k v}，包括：
- 原始指数组合（exp_pos、exp_neg、常数）
- 看跌与平方根收益的 Bernstein 多项式近似
- 收益的 JSON 读写
- 预设收益的查找

主要类与函数：
- PayoffTerm / PayoffSpec: 收益描述
- eval_payoff: 收益求值
- bernstein_coefficients / bernstein_eval: Bernstein 近似
- put_payoff_spec / sqrt_payoff_spec: 近似收益
- preset_payoff / payoff_target / resolve_payoff / bernstein_curve: 预设收益

作者: QVHedge 开发团队
版本: 1.0.0
"""

import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np
from scipy.special import comb
from scipy.stats import binom

from .exceptions import ParameterError
from ..utils.logger import get_logger

logger = get_logger(__name__)

# u⁺(s) = u⁻(s) 的退化点
DEGENERATE_TRANSFORM = 0.125j

# 默认近似参数
DEFAULT_PUT_STRIKE = 0.04
DEFAULT_DECAY = 10.0
DEFAULT_DEGREE = 20
DEFAULT_SQRT_CAP = 1.0

Target = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PayoffTerm:
    """单个指数项 a·e^{is v}"""
    a: complex
    s: complex


@dataclass(frozen=True)
class PayoffSpec:
    """
    收益描述：有限个指数项的线性组合

    Attributes:
        terms: 指数项
        label: 标签，用于输出文件名
    """
    terms: Tuple[PayoffTerm, ...]
    label: str

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(
            PayoffTerm(complex(t.a), complex(t.s)) for t in self.terms
        ))
        if not self.terms:
            raise ParameterError("收益至少需要一个指数项")
        if not self.label or not str(self.label).strip():
            raise ParameterError("收益标签不能为空")
        for index, term in enumerate(self.terms):
            if not (np.isfinite(term.a) and np.isfinite(term.s)):
                raise ParameterError(f"第 {index} 项包含非有限值: a={term.a}, s={term.s}")
            if abs(term.s - DEGENERATE_TRANSFORM) <= 1e-12:
                raise ParameterError(f"第 {index} 项的 s={term.s} 等于 i/8，免疫权重不存在")

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[complex, complex]], label: str) -> "PayoffSpec":
        return cls(tuple(PayoffTerm(a, s) for a, s in pairs), label)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([t.a for t in self.terms], dtype=complex)

    @property
    def transforms(self) -> np.ndarray:
        return np.array([t.s for t in self.terms], dtype=complex)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "terms": [
                {"a_re": t.a.real, "a_im": t.a.imag, "s_re": t.s.real, "s_im": t.s.imag}
                for t in self.terms
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PayoffSpec":
        """从 JSON 文档构造收益，缺失的虚部按 0 处理"""
        try:
            terms = tuple(
                PayoffTerm(
                    complex(float(item["a_re"]), float(item.get("a_im", 0.0))),
                    complex(float(item["s_re"]), float(item.get("s_im", 0.0))),
                )
                for item in data["terms"]
            )
            label = str(data.get("label", "custom"))
        except (KeyError, TypeError, ValueError) as e:
            raise ParameterError(f"收益文档格式错误: {e}") from e
        return cls(terms, label)


def eval_payoff(spec: PayoffSpec, qv: Union[float, np.ndarray]) -> Union[complex, np.ndarray]:
    """
    收益求值 φ(v) = Σ a_k e^{is_k v}

    Args:
        spec: 收益
        qv: 非负的二次变差，标量或数组

    Returns:
        complex 或 np.ndarray: 收益值
    """
    values = np.asarray(qv, dtype=float)
    if np.any(values < 0):
        raise ParameterError("二次变差不能为负数")
    total = np.zeros(values.shape, dtype=complex)
    for term in spec.terms:
        total = total + term.a * np.exp(1j * term.s * values)
    if total.ndim == 0:
        return complex(total)
    return total


def bernstein_coefficients(hstar: Callable[[float], float], n: int) -> np.ndarray:
    """
    Bernstein 近似 B_n(x) = Σ b_k x^k 的单项式系数

    b_k = Σ_{j≤k} h*(j/n) C(n,k) C(k,j) (-1)^{k-j}。组合数用精确整数，
    求和用有理数累加，最后只舍入一次。

    Args:
        hstar: [0, 1] 上的函数
        n: 多项式次数

    Returns:
        np.ndarray: n+1 个实系数
    """
    if int(n) != n or n < 1:
        raise ParameterError(f"Bernstein 次数必须是正整数，当前值: {n}")
    n = int(n)

    samples = []
    for j in range(n + 1):
        value = float(hstar(j / n))
        if not math.isfinite(value):
            raise ParameterError(f"h* 在采样点 x={j}/{n} 处不是有限值: {value}")
        samples.append(Fraction(value))

    coefficients = np.empty(n + 1)
    for k in range(n + 1):
        acc = Fraction(0)
        for j in range(k + 1):
            sign = -1 if (k - j) % 2 else 1
            acc += sign * int(comb(k, j, exact=True)) * samples[j]
        coefficients[k] = float(int(comb(n, k, exact=True)) * acc)
    return coefficients


def bernstein_eval(samples: Sequence[float], x: Union[float, np.ndarray]) -> np.ndarray:
    """
    在 Bernstein 基下求值 Σ h*(j/n) C(n,j) x^j (1-x)^{n-j}

    与单项式求和等价，但 n 较大时不受交错抵消影响。

    Args:
        samples: h*(0), h*(1/n), ..., h*(1)
        x: [0, 1] 内的点

    Returns:
        np.ndarray: 多项式值
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.size - 1
    x = np.asarray(x, dtype=float)
    j = np.arange(n + 1)
    weights = binom.pmf(j, n, x[..., None])
    return weights @ samples


def _transformed(target: Target, decay: float, limit: float) -> Callable[[float], float]:
    """h*(x) = h(-ln(x)/c)，x = 0 处取 h(∞)"""

    def hstar(x: float) -> float:
        if x <= 0.0:
            return limit
        return float(target(np.asarray(-math.log(x) / decay)))

    return hstar


def bernstein_samples(target: Target, decay: float, n: int, limit: float) -> np.ndarray:
    """h*(j/n)，j = 0..n"""
    hstar = _transformed(target, decay, limit)
    return np.array([hstar(j / n) for j in range(n + 1)])


def bernstein_payoff_spec(target: Target, decay: float, n: int, limit: float, label: str) -> PayoffSpec:
    """
    用 B_n(e^{-cv}) = Σ b_k e^{-ckv} 近似 h(v)

    Args:
        target: 目标函数 h
        decay: 指数衰减率 c
        n: Bernstein 次数
        limit: h(∞)
        label: 收益标签

    Returns:
        PayoffSpec: 项 (b_k, ick)
    """
    if decay <= 0:
        raise ParameterError(f"衰减率 c 必须大于0，当前值: {decay}")
    coefficients = bernstein_coefficients(_transformed(target, decay, limit), n)
    terms = tuple(PayoffTerm(complex(b), complex(0.0, decay * k)) for k, b in enumerate(coefficients))
    logger.debug(f"Bernstein 收益 {label}: n={n}, c={decay}, max|b_k|={np.max(np.abs(coefficients)):.3e}")
    return PayoffSpec(terms, label)


def put_target(strike: float = DEFAULT_PUT_STRIKE) -> Target:
    """方差看跌 h(v) = (K - v)⁺"""
    return lambda v: np.maximum(strike - np.asarray(v, dtype=float), 0.0)


def sqrt_target(v_cap: float = DEFAULT_SQRT_CAP) -> Target:
    """截断平方根 h(v) = √min(v, v_cap)"""
    return lambda v: np.sqrt(np.minimum(np.asarray(v, dtype=float), v_cap))


def put_payoff_spec(strike: float = DEFAULT_PUT_STRIKE, decay: float = DEFAULT_DECAY,
                    n: int = DEFAULT_DEGREE) -> PayoffSpec:
    """方差看跌的 Bernstein 近似，h(∞) = 0"""
    if strike <= 0:
        raise ParameterError(f"行权价 K 必须大于0，当前值: {strike}")
    return bernstein_payoff_spec(put_target(strike), decay, n, 0.0, "put")


def sqrt_payoff_spec(decay: float = DEFAULT_DECAY, n: int = DEFAULT_DEGREE,
                     v_cap: float = DEFAULT_SQRT_CAP) -> PayoffSpec:
    """波动率互换收益 √v 的 Bernstein 近似，在 v_cap 处截断使 h(∞) 有限"""
    if v_cap <= 0:
        raise ParameterError(f"截断值 v_cap 必须大于0，当前值: {v_cap}")
    return bernstein_payoff_spec(sqrt_target(v_cap), decay, n, math.sqrt(v_cap), "volswap")


def exp_pos() -> PayoffSpec:
    return PayoffSpec((PayoffTerm(1.0, -1j),), "exp_pos")


def exp_neg() -> PayoffSpec:
    return PayoffSpec((PayoffTerm(1.0, 1j),), "exp_neg")


def constant() -> PayoffSpec:
    return PayoffSpec((PayoffTerm(1.0, 0.0),), "constant")


PRESETS: Dict[str, Callable[..., PayoffSpec]] = {
    "exp_pos": exp_pos,
    "exp_neg": exp_neg,
    "put": put_payoff_spec,
    "volswap": sqrt_payoff_spec,
    "constant": constant,
}

# 参数名到各构造函数关键字的映射
_PRESET_PARAMS = {
    "put": {"K": "strike", "strike": "strike", "c": "decay", "decay": "decay", "n": "n"},
    "volswap": {"c": "decay", "decay": "decay", "n": "n", "v_cap": "v_cap"},
}


def _preset_kwargs(name: str, params: Dict[str, Any]) -> Dict[str, Any]:
    mapping = _PRESET_PARAMS.get(name, {})
    kwargs = {}
    for key, value in params.items():
        if key not in mapping:
            raise ParameterError(f"预设收益 {name} 不支持参数 {key}")
        kwargs[mapping[key]] = int(value) if mapping[key] == "n" else float(value)
    return kwargs


def preset_payoff(name: str, **params) -> PayoffSpec:
    """
    按名称构造预设收益

    Args:
        name: exp_pos、exp_neg、put、volswap 或 constant
        **params: put 接受 K/c/n，volswap 接受 c/n/v_cap

    Returns:
        PayoffSpec: 收益
    """
    if name not in PRESETS:
        raise ParameterError(f"未知的预设收益: {name}，可选: {', '.join(available_presets())}")
    return PRESETS[name](**_preset_kwargs(name, params))


def payoff_target(name: str, **params) -> Target:
    """预设收益对应的精确目标函数"""
    if name not in PRESETS:
        raise ParameterError(f"未知的预设收益: {name}")
    kwargs = _preset_kwargs(name, params)
    if name == "put":
        return put_target(kwargs.get("strike", DEFAULT_PUT_STRIKE))
    if name == "volswap":
        return sqrt_target(kwargs.get("v_cap", DEFAULT_SQRT_CAP))
    if name == "exp_pos":
        return lambda v: np.exp(np.asarray(v, dtype=float))
    if name == "exp_neg":
        return lambda v: np.exp(-np.asarray(v, dtype=float))
    return lambda v: np.ones_like(np.asarray(v, dtype=float))


def bernstein_curve(name: str, qv: Union[float, np.ndarray], **params) -> np.ndarray:
    """
    put / volswap 预设在 Bernstein 基下的求值 B_n(e^{-cv})

    与 eval_payoff 对指数和求值的结果相同，但不经过交错符号的系数。

    Args:
        name: put 或 volswap
        qv: 二次变差取值
        **params: 与 preset_payoff 相同

    Returns:
        np.ndarray: 近似收益
    """
    if name not in ("put", "volswap"):
        raise ParameterError(f"预设收益 {name} 不是 Bernstein 近似")
    kwargs = _preset_kwargs(name, params)
    decay = kwargs.get("decay", DEFAULT_DECAY)
    n = kwargs.get("n", DEFAULT_DEGREE)
    limit = 0.0 if name == "put" else math.sqrt(kwargs.get("v_cap", DEFAULT_SQRT_CAP))
    samples = bernstein_samples(payoff_target(name, **params), decay, n, limit)
    return bernstein_eval(samples, np.exp(-decay * np.asarray(qv, dtype=float)))


def coefficient_roundoff_bound(spec: PayoffSpec) -> float:
    """系数舍入误差上界 (项数)·ε·Σ|a_k|"""
    return len(spec.terms) * np.finfo(float).eps * float(np.sum(np.abs(spec.coefficients)))


def is_real_decreasing(spec: PayoffSpec) -> bool:
    """所有 a_k 为实数且 s_k = iλ_k（λ_k ≥ 0）"""
    return all(
        t.a.imag == 0.0 and t.s.real == 0.0 and t.s.imag >= 0.0
        for t in spec.terms
    )


def load_payoff(path: str) -> PayoffSpec:
    """从 JSON 文件读取收益"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ParameterError(f"无法读取收益文件 {path}: {e}") from e
    return PayoffSpec.from_dict(data)


def save_payoff(spec: PayoffSpec, path: str) -> None:
    """将收益写入 JSON 文件"""
    with open(path, "w", encoding="utf-8") as f:
        json.dump(spec.to_dict(), f, ensure_ascii=False, indent=2)


def resolve_payoff(reference: str, **params) -> PayoffSpec:
    """预设名称或 JSON 文件路径"""
    if reference in PRESETS:
        return preset_payoff(reference, **params)
    if os.path.isfile(reference):
        return load_payoff(reference)
    presets = ", ".join(available_presets())
    raise ParameterError(f"收益既不是预设名称也不是文件: {reference}，可选预设: {presets}")


def available_presets() -> List[str]:
    return list(PRESETS)

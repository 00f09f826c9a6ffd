"""
Heston 模型模块

该模块实现 Heston 随机波动率模型下的闭式计算，负责：
- 对数价格的条件特征函数 E_t e^{iuX_T}
- 二次变差的条件特征函数 E_t e^{is<X>_T}
- 指数组合收益的真实价值 V_t
- 二次变差密度的数值反演
- 沿时间网格预计算的特征函数系数表

主要类与函数：
- HestonParams: 模型与市场参数
- MarketState: 某一时刻的市场状态
- CharacteristicTable / QVTable: 预计算系数表
- logprice_cf / qv_cf / true_value / qv_density

作者: QVHedge 开发团队
版本: 1.0.0
"""

from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid

from .config import Config
from .exceptions import DensityInversionError, NumericalOverflowError, ParameterError
from ..utils.logger import get_logger

if TYPE_CHECKING:
    from .payoffs import PayoffSpec

logger = get_logger(__name__)

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class HestonParams:
    """Heston 模型参数（零利率）"""
    x0: float = 0.0        # 初始对数价格
    y0: float = 0.04       # 初始方差
    kappa: float = 1.15    # 均值回复速度
    theta: float = 0.04    # 长期方差
    delta: float = 0.2     # 波动率的波动率
    rho: float = 0.0       # 价格与方差的相关系数
    t_final: float = 1.0   # 到期时间 T

    def __post_init__(self):
        errors = []
        for name in ("y0", "kappa", "theta", "delta", "t_final"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                errors.append(f"{name} 必须大于0，当前值: {value}")
        if not np.isfinite(self.x0):
            errors.append(f"x0 必须是有限值，当前值: {self.x0}")
        if not np.isfinite(self.rho) or abs(self.rho) > 1:
            errors.append(f"rho 必须在[-1, 1]内，当前值: {self.rho}")
        if errors:
            raise ParameterError("; ".join(errors))

    def with_rho(self, rho: float) -> "HestonParams":
        """返回只替换相关系数的新参数"""
        return replace(self, rho=float(rho))


@dataclass(frozen=True)
class MarketState:
    """时刻 t 的市场状态 (X_t, Y_t, <X>_t)"""
    t: float
    x: float
    y: float
    qv: float = 0.0

    def __post_init__(self):
        if self.t < 0:
            raise ParameterError(f"t 不能为负数，当前值: {self.t}")
        if self.y < 0:
            raise ParameterError(f"y 不能为负数，当前值: {self.y}")
        if self.qv < 0:
            raise ParameterError(f"qv 不能为负数，当前值: {self.qv}")

    @classmethod
    def initial(cls, p: HestonParams) -> "MarketState":
        return cls(t=0.0, x=p.x0, y=p.y0, qv=0.0)


def _remaining(p: HestonParams, state: MarketState) -> float:
    if state.t > p.t_final:
        raise ParameterError(f"t={state.t} 超过到期时间 T={p.t_final}")
    return p.t_final - state.t


def _check_finite(values, argument: complex, tau) -> None:
    if not np.all(np.isfinite(values)):
        bad_tau = tau
        if np.ndim(tau) > 0:
            mask = ~np.isfinite(np.broadcast_to(values, np.shape(tau)))
            bad_tau = float(np.asarray(tau)[mask][0])
        raise NumericalOverflowError("特征函数计算出现非有限值", argument, bad_tau)


def cf_coefficients(p: HestonParams, tau: ArrayLike, u: complex) -> Tuple[np.ndarray, np.ndarray]:
    """
    计算对数价格特征函数的系数 C(τ, u) 与 D(τ, u)

    d(u) 取主值平方根。使用 g = 1/γ 与 e^{-dτ} 的等价写法，
    在 u = 0 与 u = -i（γ 的极点）处仍然有限。

    Args:
        p: 模型参数
        tau: 剩余期限，标量或数组
        u: 变换参数

    Returns:
        Tuple[np.ndarray, np.ndarray]: (C, D)
    """
    tau = np.asarray(tau, dtype=float)
    u = complex(u)
    delta2 = p.delta * p.delta
    b = p.kappa - 1j * p.rho * p.delta * u
    d = np.sqrt(delta2 * (u * u + 1j * u) + b * b)
    g = (b - d) / (b + d)
    e = np.exp(-d * tau)

    with np.errstate(all="ignore"):
        c = p.kappa * p.theta / delta2 * ((b - d) * tau - 2.0 * np.log((1.0 - g * e) / (1.0 - g)))
        dd = (b - d) / delta2 * (1.0 - e) / (1.0 - g * e)

    # τ = 0 时特征函数退化为 e^{iux}
    c = np.where(tau == 0.0, 0.0 + 0.0j, c)
    dd = np.where(tau == 0.0, 0.0 + 0.0j, dd)
    _check_finite(c, u, tau)
    _check_finite(dd, u, tau)
    return c, dd


def qv_coefficients(p: HestonParams, tau: ArrayLike, s: complex) -> Tuple[np.ndarray, np.ndarray]:
    """
    计算二次变差特征函数的系数 A(τ, s) 与 B(τ, s)

    分母取 ξ - κ + (ξ + κ)e^{ξτ}，再同除 e^{ξτ} 以避免溢出。

    Args:
        p: 模型参数
        tau: 剩余期限，标量或数组
        s: 变换参数

    Returns:
        Tuple[np.ndarray, np.ndarray]: (A, B)
    """
    tau = np.asarray(tau, dtype=float)
    s = complex(s)
    delta2 = p.delta * p.delta
    xi = np.sqrt(p.kappa * p.kappa - 2.0 * delta2 * 1j * s)
    e = np.exp(-xi * tau)

    with np.errstate(all="ignore"):
        den = (xi + p.kappa) + (xi - p.kappa) * e
        a = 2.0 * p.kappa * p.theta / delta2 * (np.log(2.0 * xi / den) + 0.5 * (p.kappa - xi) * tau)
        b = 2j * s * (1.0 - e) / den

    a = np.where(tau == 0.0, 0.0 + 0.0j, a)
    b = np.where(tau == 0.0, 0.0 + 0.0j, b)
    _check_finite(a, s, tau)
    _check_finite(b, s, tau)
    return a, b


def logprice_cf(p: HestonParams, state: MarketState, u: complex) -> complex:
    """
    对数价格的条件特征函数 E_t e^{iuX_T} = e^{iuX_t + C(τ,u) + Y_t D(τ,u)}

    Args:
        p: 模型参数
        state: 当前市场状态
        u: 变换参数

    Returns:
        complex: 特征函数值
    """
    tau = _remaining(p, state)
    u = complex(u)
    c, d = cf_coefficients(p, tau, u)
    value = complex(np.exp(1j * u * state.x + c + state.y * d))
    if not np.isfinite(value):
        raise NumericalOverflowError("对数价格特征函数溢出", u, tau)
    return value


def qv_cf(p: HestonParams, state: MarketState, s: complex) -> complex:
    """
    二次变差的条件特征函数 E_t e^{is<X>_T} = e^{is<X>_t + A(τ,s) + Y_t B(τ,s)}

    结果与 ρ 和 X_t 无关。

    Args:
        p: 模型参数
        state: 当前市场状态
        s: 变换参数

    Returns:
        complex: 特征函数值
    """
    tau = _remaining(p, state)
    s = complex(s)
    a, b = qv_coefficients(p, tau, s)
    value = complex(np.exp(1j * s * state.qv + a + state.y * b))
    if not np.isfinite(value):
        raise NumericalOverflowError("二次变差特征函数溢出", s, tau)
    return value


def true_value(p: HestonParams, payoff: "PayoffSpec", state: MarketState) -> complex:
    """
    指数组合收益的真实价值 V_t = Σ a_k E_t e^{is_k<X>_T}

    Args:
        p: 模型参数
        payoff: 收益
        state: 当前市场状态

    Returns:
        complex: V_t
    """
    total = 0j
    for term in payoff.terms:
        total += term.a * qv_cf(p, state, term.s)
    return total


def qv_mean(p: HestonParams) -> float:
    """<X>_T 的期望 θT + (y0 - θ)(1 - e^{-κT})/κ"""
    return p.theta * p.t_final + (p.y0 - p.theta) * (1.0 - np.exp(-p.kappa * p.t_final)) / p.kappa


def _qv_cf_initial(p: HestonParams, s: np.ndarray) -> np.ndarray:
    """t = 0 时对一组实频率向量化计算二次变差特征函数"""
    delta2 = p.delta * p.delta
    tau = p.t_final
    xi = np.sqrt(p.kappa * p.kappa - 2.0 * delta2 * 1j * s)
    e = np.exp(-xi * tau)
    den = (xi + p.kappa) + (xi - p.kappa) * e
    a = 2.0 * p.kappa * p.theta / delta2 * (np.log(2.0 * xi / den) + 0.5 * (p.kappa - xi) * tau)
    b = 2j * s * (1.0 - e) / den
    return np.exp(a + p.y0 * b)


def qv_density(p: HestonParams, grid: Sequence[float]) -> np.ndarray:
    """
    数值反演 <X>_T 的概率密度

    f(v) = (1/π) ∫_0^∞ Re[e^{-isv} φ(s)] ds，积分用梯形公式；
    截断频率自适应加倍，直到 |φ| 的尾部小于峰值的 DENSITY_TAIL_RATIO。

    Args:
        p: 模型参数
        grid: 非负且严格递增的二次变差网格

    Returns:
        np.ndarray: 非负密度值
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ParameterError("密度网格必须是非空一维数组")
    if np.any(grid < 0) or np.any(np.diff(grid) <= 0):
        raise ParameterError("密度网格必须非负且严格递增")

    # φ(0) = 1 是峰值
    limit = Config.DENSITY_START_FREQUENCY
    tail = float(np.abs(_qv_cf_initial(p, np.array([limit])))[0])
    while tail >= Config.DENSITY_TAIL_RATIO:
        limit *= 2.0
        if limit > Config.DENSITY_MAX_FREQUENCY:
            raise DensityInversionError(limit, tail)
        tail = float(np.abs(_qv_cf_initial(p, np.array([limit])))[0])

    # 频率步长使梯形公式的混叠周期至少覆盖 4 倍的密度支撑
    support = max(float(grid[-1]), 10.0 * qv_mean(p), 1.0)
    step = np.pi / (2.0 * support)
    n_freq = int(np.ceil(limit / step)) + 1
    freqs = np.linspace(0.0, limit, n_freq)
    phi = _qv_cf_initial(p, freqs)
    if not np.all(np.isfinite(phi)):
        raise DensityInversionError(limit, float("nan"))

    density = np.empty_like(grid)
    # 分块以限制内存
    block = max(1, 2_000_000 // n_freq)
    for start in range(0, grid.size, block):
        v = grid[start:start + block, None]
        integrand = np.real(np.exp(-1j * freqs[None, :] * v) * phi[None, :])
        density[start:start + block] = trapezoid(integrand, freqs, axis=1) / np.pi

    logger.debug(f"密度反演完成: 截断频率={limit:g}, 频率点数={n_freq}, 尾部={tail:.2e}")
    return np.maximum(density, 0.0)


class CharacteristicTable:
    """
    沿时间网格预计算的 C(τ_j, u)、D(τ_j, u)

    C、D 只依赖 τ 与 u，因此每个不同的 u 只需计算一次；
    之后每一步只剩两次指数运算。数组构造后只读，可在线程间共享。
    """

    def __init__(self, p: HestonParams, times: np.ndarray, u: complex):
        self.u = complex(u)
        self.tau = np.asarray(p.t_final - np.asarray(times, dtype=float))
        self.tau = np.where(np.abs(self.tau) < 1e-14, 0.0, self.tau)
        self.c, self.d = cf_coefficients(p, self.tau, self.u)
        for array in (self.tau, self.c, self.d):
            array.setflags(write=False)

    def value(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Q = e^{iux + C + yD}，x、y 形状为 (步数+1,) 或 (步数+1, 路径数)"""
        shape = (-1,) + (1,) * (np.ndim(x) - 1)
        return np.exp(1j * self.u * x + self.c.reshape(shape) + self.d.reshape(shape) * y)


class QVTable:
    """沿时间网格预计算的 A(τ_j, s)、B(τ_j, s)"""

    def __init__(self, p: HestonParams, times: np.ndarray, s: complex):
        self.s = complex(s)
        self.tau = np.asarray(p.t_final - np.asarray(times, dtype=float))
        self.tau = np.where(np.abs(self.tau) < 1e-14, 0.0, self.tau)
        self.a, self.b = qv_coefficients(p, self.tau, self.s)
        for array in (self.tau, self.a, self.b):
            array.setflags(write=False)

    def value(self, qv: np.ndarray, y: np.ndarray) -> np.ndarray:
        """E_t e^{is<X>_T} = e^{is<X>_t + A + yB}"""
        shape = (-1,) + (1,) * (np.ndim(qv) - 1)
        return np.exp(1j * self.s * qv + self.a.reshape(shape) + self.b.reshape(shape) * y)


def cf_table(p: HestonParams, times: np.ndarray, u: complex) -> CharacteristicTable:
    return CharacteristicTable(p, times, u)


def qv_table(p: HestonParams, times: np.ndarray, s: complex) -> QVTable:
    return QVTable(p, times, s)

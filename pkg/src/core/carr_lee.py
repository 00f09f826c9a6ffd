"""
Carr-Lee 对冲组合模块

该模块实现二次变差指数收益的定价与复制，负责：
- 指数 u±(s) 的计算
- 相关性免疫权重 α±(s)
- 乘子 N±、欧式腿 Q± 与持股数量
- 基本组合与相关性免疫组合的初始价值

主要类与函数：
- Sign: 组合符号（+ / -）
- ExponentPair / ImmunizationWeights / HedgeState
- exponents / immunization_weights / multiplier_n / exp_claim_price
- share_holding / basic_initial_value / immunized_initial_value / initial_prices

作者: QVHedge 开发团队
版本: 1.0.0
"""

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

from .exceptions import DegenerateRootError, NumericalOverflowError, ParameterError
from .heston_model import HestonParams, MarketState, logprice_cf, true_value

if TYPE_CHECKING:
    from .payoffs import PayoffSpec

# u⁺ 与 u⁻ 的最小间距，低于该值视为二重根（s = i/8）
DEGENERATE_ROOT_TOLERANCE = 1e-12


class Sign(Enum):
    """组合符号"""
    PLUS = "+"
    MINUS = "-"


@dataclass(frozen=True)
class ExponentPair:
    """u±(s) = i(-1/2 ± √(1/4 + 2is))，主值平方根"""
    u_plus: complex
    u_minus: complex
    s: complex

    def u(self, sign: Sign) -> complex:
        return self.u_plus if sign is Sign.PLUS else self.u_minus


@dataclass(frozen=True)
class ImmunizationWeights:
    """α⁺ + α⁻ = 1，α⁺u⁺ + α⁻u⁻ = 0"""
    alpha_plus: complex
    alpha_minus: complex

    def weight(self, sign: Sign) -> complex:
        return self.alpha_plus if sign is Sign.PLUS else self.alpha_minus


@dataclass(frozen=True)
class HedgeState:
    """某一时刻单个指数收益的对冲状态"""
    n_value: complex
    q_value: complex
    share_count: complex
    sign: Sign

    @property
    def portfolio_value(self) -> complex:
        return self.n_value * self.q_value


@dataclass(frozen=True)
class InitialPrices:
    """初始时刻的 Π⁺、Π⁻、Π 与真实价值 V"""
    pi_plus: complex
    pi_minus: complex
    pi_imm: complex
    v_true: complex


def exponents(s: complex) -> ExponentPair:
    """
    计算指数对 u±(s)

    Args:
        s: 变换参数

    Returns:
        ExponentPair: 两个根，u_plus 取 + 分支
    """
    s = complex(s)
    # -0.0 实部会把平方根翻到另一分支
    s = complex(s.real + 0.0, s.imag + 0.0)
    root = complex(np.sqrt(0.25 + 2j * s))
    return ExponentPair(
        u_plus=1j * (-0.5 + root),
        u_minus=1j * (-0.5 - root),
        s=s,
    )


def immunization_weights(s: complex) -> ImmunizationWeights:
    """
    求解相关性免疫权重

    Args:
        s: 变换参数

    Returns:
        ImmunizationWeights: (α⁺, α⁻)

    Raises:
        DegenerateRootError: s = i/8 时两根重合
    """
    pair = exponents(s)
    if abs(pair.u_plus - pair.u_minus) <= DEGENERATE_ROOT_TOLERANCE:
        raise DegenerateRootError(pair.s)
    return ImmunizationWeights(
        alpha_plus=pair.u_minus / (pair.u_minus - pair.u_plus),
        alpha_minus=pair.u_plus / (pair.u_plus - pair.u_minus),
    )


def multiplier_n(state: MarketState, s: complex, sign: Sign) -> complex:
    """
    乘子 N±_t(s) = e^{-iu±X_t + is<X>_t}

    Args:
        state: 市场状态
        s: 变换参数
        sign: 组合符号

    Returns:
        complex: 乘子值
    """
    s = complex(s)
    u = exponents(s).u(sign)
    value = complex(np.exp(-1j * u * state.x + 1j * s * state.qv))
    if not np.isfinite(value):
        raise NumericalOverflowError("乘子 N 溢出", s)
    return value


def exp_claim_price(p: HestonParams, state: MarketState, s: complex, sign: Sign) -> complex:
    """
    基本复制组合的价值 Π±_t(s) = N±_t(s) Q±_t(s)

    ρ = 0 时等于 E_t e^{is<X>_T}；其他 ρ 下为近似值。

    Args:
        p: 模型参数
        state: 市场状态
        s: 变换参数
        sign: 组合符号

    Returns:
        complex: 组合价值
    """
    u = exponents(s).u(sign)
    return multiplier_n(state, s, sign) * logprice_cf(p, state, u)


def share_holding(s: complex, sign: Sign, n_value: complex, q_value: complex, spot: float) -> complex:
    """
    每单位收益的持股数量 -iu± N Q / S

    Args:
        s: 变换参数
        sign: 组合符号
        n_value: 乘子 N
        q_value: 欧式腿 Q
        spot: 标的价格 S > 0

    Returns:
        complex: 持股数量
    """
    if not spot > 0:
        raise ParameterError(f"标的价格必须大于0，当前值: {spot}")
    u = exponents(s).u(sign)
    return -1j * u * n_value * q_value / spot


def hedge_state(p: HestonParams, state: MarketState, s: complex, sign: Sign) -> HedgeState:
    """在给定市场状态下构造对冲状态"""
    u = exponents(s).u(sign)
    n_value = multiplier_n(state, s, sign)
    q_value = logprice_cf(p, state, u)
    spot = float(np.exp(state.x))
    return HedgeState(
        n_value=n_value,
        q_value=q_value,
        share_count=share_holding(s, sign, n_value, q_value, spot),
        sign=sign,
    )


def basic_initial_value(p: HestonParams, state: MarketState, payoff: "PayoffSpec", sign: Sign) -> complex:
    """基本组合价值 Σ a_k N±Q±(s_k)"""
    total = 0j
    for term in payoff.terms:
        total += term.a * exp_claim_price(p, state, term.s, sign)
    return total


def immunized_initial_value(p: HestonParams, state: MarketState, payoff: "PayoffSpec") -> complex:
    """
    相关性免疫组合价值 Σ a_k (α⁺ N Q⁺ + α⁻ N Q⁻)

    Args:
        p: 模型参数
        state: 市场状态
        payoff: 收益

    Returns:
        complex: 组合价值
    """
    total = 0j
    for term in payoff.terms:
        weights = immunization_weights(term.s)
        plus = exp_claim_price(p, state, term.s, Sign.PLUS)
        minus = exp_claim_price(p, state, term.s, Sign.MINUS)
        total += term.a * (weights.alpha_plus * plus + weights.alpha_minus * minus)
    return total


def initial_prices(p: HestonParams, payoff: "PayoffSpec") -> InitialPrices:
    """t = 0 时的 Π₀⁺、Π₀⁻、Π₀ 与 V₀，供 ρ 扫描使用"""
    state = MarketState.initial(p)
    return InitialPrices(
        pi_plus=basic_initial_value(p, state, payoff, Sign.PLUS),
        pi_minus=basic_initial_value(p, state, payoff, Sign.MINUS),
        pi_imm=immunized_initial_value(p, state, payoff),
        v_true=true_value(p, payoff, state),
    )

"""
全规模的对冲实验（标记为 slow）

运行: pytest -m slow
"""

import numpy as np
import pytest

from src.core.heston_model import HestonParams
from src.core.mc_engine import SimConfig, build_hedge_tables, evolve_batch, hedge_experiment, simulate_batch
from src.core.payoffs import exp_neg, exp_pos, put_payoff_spec, sqrt_payoff_spec
from src.core.stats import Convention, summarize

pytestmark = pytest.mark.slow

FULL_CFG = SimConfig(seed=20240531)


def _within_factor(value, reference, factor=3.0):
    return reference / factor <= abs(value) <= reference * factor


@pytest.fixture(scope="module")
def exp_pos_summaries():
    return {
        rho: summarize(hedge_experiment(HestonParams(), exp_pos(), FULL_CFG.with_rho(rho)))
        for rho in (-0.99, -0.66, 0.0, 0.66, 0.99)
    }


class TestExpPos:
    def test_zero_correlation(self, exp_pos_summaries):
        summary = exp_pos_summaries[0.0]
        for name in ("plus", "minus", "immunized"):
            assert abs(summary.strategy(name).mean) <= 5e-5

    @pytest.mark.parametrize("rho", [-0.99, -0.66, 0.66, 0.99])
    def test_sign_pattern_and_ordering(self, exp_pos_summaries, rho):
        summary = exp_pos_summaries[rho]
        plus, minus = summary.plus.mean.real, summary.minus.mean.real
        assert np.sign(minus) == np.sign(rho)
        assert np.sign(plus) == -np.sign(rho)
        assert abs(summary.immunized.mean) < 0.3 * min(abs(plus), abs(minus))
        assert summary.immunized.std < min(summary.plus.std, summary.minus.std)

    def test_printed_magnitudes(self, exp_pos_summaries):
        assert exp_pos_summaries[-0.99].immunized.mean.real > 0
        assert _within_factor(exp_pos_summaries[-0.99].immunized.mean.real, 3.10e-4)
        assert _within_factor(exp_pos_summaries[0.66].immunized.mean.real, 1.49e-4)
        assert _within_factor(exp_pos_summaries[0.66].immunized.std, 5.52e-5)
        assert _within_factor(exp_pos_summaries[0.99].minus.mean.real, 6.57e-3)
        assert _within_factor(exp_pos_summaries[0.99].plus.mean.real, 2.77e-3)


class TestExpNeg:
    @pytest.mark.parametrize("rho", [-0.99, -0.66, 0.66, 0.99])
    def test_real_parts_identical_and_immunized_smaller(self, rho):
        errors = hedge_experiment(HestonParams(), exp_neg(), FULL_CFG.with_rho(rho))
        np.testing.assert_array_equal(errors.eps_plus.real, errors.eps_minus.real)
        summary = summarize(errors, Convention.REAL_PART)
        assert abs(summary.immunized.mean) < abs(summary.plus.mean)
        assert summary.immunized.std < summary.plus.std

    def test_printed_magnitude(self):
        errors = hedge_experiment(HestonParams(), exp_neg(), FULL_CFG.with_rho(-0.99))
        assert _within_factor(summarize(errors, Convention.REAL_PART).immunized.mean.real, 2.66e-4)


class TestBernsteinPayoffs:
    # (ρ, ε̂ 免疫, ε̂ 基本, σ̂ 免疫, σ̂ 基本)
    PUT = [
        (-0.99, 2.95e-3, 3.54e-3, 1.47e-3, 1.51e-3),
        (-0.66, 9.57e-4, 1.33e-3, 9.02e-4, 9.44e-4),
        (0.66, 8.70e-4, 4.98e-4, 9.71e-4, 9.24e-4),
        (0.99, 2.86e-3, 2.26e-3, 1.68e-3, 1.63e-3),
    ]
    VOLSWAP = [
        (-0.99, 1.26e-3, 2.13e-3, 5.93e-4, 9.47e-4),
        (-0.66, 3.49e-4, 1.95e-3, 2.01e-4, 5.18e-4),
        (0.66, 3.44e-4, 2.75e-3, 2.17e-4, 6.53e-4),
        (0.99, 1.18e-3, 4.82e-3, 7.03e-4, 1.03e-3),
    ]

    @staticmethod
    def _check_magnitudes(summary, imm_mean, basic_mean, imm_std, basic_std):
        assert _within_factor(summary.immunized.mean.real, imm_mean)
        assert _within_factor(summary.plus.mean.real, basic_mean)
        assert _within_factor(summary.immunized.std, imm_std)
        assert _within_factor(summary.plus.std, basic_std)

    @pytest.mark.parametrize("rho,imm_mean,basic_mean,imm_std,basic_std", PUT)
    def test_put_pattern(self, rho, imm_mean, basic_mean, imm_std, basic_std):
        errors = hedge_experiment(HestonParams(), put_payoff_spec(), FULL_CFG.with_rho(rho))
        summary = summarize(errors, Convention.REAL_PART)
        immunized, basic = abs(summary.immunized.mean), abs(summary.plus.mean)
        if rho < 0:
            assert immunized < basic
        else:
            assert basic < immunized
        self._check_magnitudes(summary, imm_mean, basic_mean, imm_std, basic_std)

    @pytest.mark.parametrize("rho,imm_mean,basic_mean,imm_std,basic_std", VOLSWAP)
    def test_volswap_immunized_wins(self, rho, imm_mean, basic_mean, imm_std, basic_std):
        errors = hedge_experiment(HestonParams(), sqrt_payoff_spec(), FULL_CFG.with_rho(rho))
        summary = summarize(errors, Convention.REAL_PART)
        assert abs(summary.immunized.mean) < abs(summary.plus.mean)
        assert summary.immunized.std < summary.plus.std
        self._check_magnitudes(summary, imm_mean, basic_mean, imm_std, basic_std)


class TestRealValuedness:
    def test_exp_neg_immunized_track_is_real(self):
        p = HestonParams(rho=-0.66)
        cfg = FULL_CFG
        tables = build_hedge_tables(p, exp_neg(), cfg.time_grid(p))
        for start in range(0, cfg.n_paths, 250):
            batch = simulate_batch(p, cfg, np.arange(start, start + 250))
            portfolios = evolve_batch(batch, p, exp_neg(), tables, with_value=False)
            bound = 1e-10 * (1 + np.abs(portfolios.pi_imm.real))
            assert np.all(np.abs(portfolios.pi_imm.imag) <= bound)


class TestDiscretisation:
    def test_error_spread_shrinks_with_step(self):
        spreads = []
        for dt in (1 / 1000, 1 / 2000):
            cfg = SimConfig(dt=dt, n_paths=4000, seed=5, rho_override=0.0)
            errors = hedge_experiment(HestonParams(), exp_pos(), cfg)
            spreads.append(summarize(errors).immunized.std)
        # 步长减半，标准差约减半（一阶收敛）
        assert 1.6 <= spreads[0] / spreads[1] <= 2.4

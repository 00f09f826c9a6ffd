"""mc_engine 测试"""

import numpy as np
import pytest

from src.core.carr_lee import Sign, basic_initial_value, hedge_state, immunized_initial_value
from src.core.config import Config
from src.core.exceptions import ExperimentCancelled, ParameterError
from src.core.heston_model import HestonParams, MarketState, true_value
from src.core.mc_engine import (PathBatch, SimConfig, _path_normals, build_hedge_tables, evolve_batch,
                                evolve_portfolios, hedge_experiment, simulate_batch, simulate_path,
                                simulate_paths, track_frame)
from src.core.payoffs import PayoffSpec, constant, exp_neg, exp_pos, put_payoff_spec
from src.core.stats import summarize

from .conftest import QUICK_WIDEN


class TestSimConfig:
    def test_defaults(self):
        cfg = SimConfig()
        assert (cfg.dt, cfg.n_paths) == (1 / 1000, 10000)
        assert cfg.n_steps(HestonParams()) == 1000

    def test_quick(self):
        cfg = SimConfig.quick(seed=5)
        assert (cfg.dt, cfg.n_paths, cfg.seed) == (Config.QUICK_DT, Config.QUICK_N_PATHS, 5)

    @pytest.mark.parametrize("kwargs", [{"dt": 0.0}, {"n_paths": 0}, {"seed": -1},
                                        {"rho_override": 1.5}, {"parallel_workers": 0}])
    def test_invalid(self, kwargs):
        with pytest.raises(ParameterError):
            SimConfig(**kwargs)

    def test_grid_must_divide_maturity(self, default_params):
        with pytest.raises(ParameterError):
            SimConfig(dt=0.3).n_steps(default_params)

    def test_time_grid_ends_at_maturity(self, default_params):
        grid = SimConfig(dt=1 / 250).time_grid(default_params)
        assert grid.size == 251
        assert grid[0] == 0.0 and grid[-1] == 1.0

    def test_rho_override(self, default_params):
        cfg = SimConfig().with_rho(-0.5)
        assert cfg.effective_params(default_params).rho == -0.5
        assert SimConfig().effective_params(default_params) is default_params

    def test_resolved_workers(self):
        assert SimConfig(parallel_workers=3).resolved_workers() == 3
        assert 1 <= SimConfig().resolved_workers() <= Config.MAX_PARALLEL_WORKERS


class TestSimulation:
    def test_path_invariants(self, default_params, small_cfg):
        batch = simulate_batch(default_params.with_rho(-0.66), small_cfg, np.arange(50))
        assert batch.x.shape == (251, 50)
        assert np.all(batch.qv[0] == 0.0)
        assert np.all(np.diff(batch.qv, axis=0) >= 0.0)
        assert np.all(batch.qv[-1] > 0.0)
        assert np.all(batch.x[0] == 0.0) and np.all(batch.y[0] == 0.04)
        assert int(batch.negative_y_clamps.sum()) == 0

    def test_normals_depend_only_on_seed_and_path(self):
        first = _path_normals(7, 3, 100)
        assert first.shape == (100, 2)
        np.testing.assert_array_equal(first, _path_normals(7, 3, 100))
        assert not np.array_equal(first, _path_normals(7, 4, 100))
        assert not np.array_equal(first, _path_normals(8, 3, 100))
        assert np.all(np.isfinite(first))

    def test_batch_composition_irrelevant(self, default_params, small_cfg):
        together = simulate_batch(default_params, small_cfg, np.arange(10))
        alone = simulate_batch(default_params, small_cfg, [7])
        np.testing.assert_array_equal(together.x[:, 7], alone.x[:, 0])
        np.testing.assert_array_equal(together.qv[:, 7], alone.qv[:, 0])

    def test_single_path_matches_stream(self, default_params, small_cfg):
        records = list(simulate_paths(default_params, small_cfg.with_rho(0.3)))
        assert len(records) == small_cfg.n_paths
        assert [r.path_id for r in records[:3]] == [0, 1, 2]
        path = simulate_path(default_params, small_cfg.with_rho(0.3), 321)
        np.testing.assert_array_equal(path.x, records[321].x)
        np.testing.assert_array_equal(path.y, records[321].y)

    def test_path_id_out_of_range(self, default_params, small_cfg):
        with pytest.raises(ParameterError):
            simulate_path(default_params, small_cfg, small_cfg.n_paths)

    def test_negative_variance_clamped_and_counted(self, small_cfg):
        wild = HestonParams(y0=0.01, theta=0.01, kappa=0.5, delta=1.5, rho=-0.5)
        batch = simulate_batch(wild, small_cfg, np.arange(100))
        assert int(batch.negative_y_clamps.sum()) > 0
        assert np.all(np.isfinite(batch.x))
        assert np.all(np.diff(batch.qv, axis=0) >= 0.0)

    def test_martingale(self, default_params, quick_cfg):
        batch = simulate_batch(default_params.with_rho(-0.66), quick_cfg, np.arange(quick_cfg.n_paths))
        spot = np.exp(batch.x[-1])
        se = spot.std(ddof=1) / np.sqrt(spot.size)
        assert abs(spot.mean() - 1.0) <= QUICK_WIDEN * 3 * se

    def test_mean_quadratic_variation(self, default_params, quick_cfg):
        batch = simulate_batch(default_params, quick_cfg, np.arange(quick_cfg.n_paths))
        qv = batch.qv[-1]
        se = qv.std(ddof=1) / np.sqrt(qv.size)
        assert abs(qv.mean() - 0.04) <= QUICK_WIDEN * 3 * se + 1e-4


class TestPortfolios:
    def _batch(self, p, cfg, count=20):
        return simulate_batch(p, cfg, np.arange(count))

    def test_initial_values_match_closed_form(self, small_cfg):
        p = HestonParams(rho=-0.66)
        batch = self._batch(p, small_cfg)
        payoff = exp_pos()
        portfolios = evolve_batch(batch, p, payoff)
        state = MarketState.initial(p)
        np.testing.assert_allclose(portfolios.pi_plus[0], basic_initial_value(p, state, payoff, Sign.PLUS), rtol=1e-12)
        np.testing.assert_allclose(portfolios.pi_minus[0], basic_initial_value(p, state, payoff, Sign.MINUS), rtol=1e-12)
        np.testing.assert_allclose(portfolios.pi_imm[0], immunized_initial_value(p, state, payoff), rtol=1e-12)
        np.testing.assert_allclose(portfolios.v_true[0], true_value(p, payoff, state), rtol=1e-12)

    def test_self_financing(self, small_cfg):
        p = HestonParams(rho=-0.5)
        path = simulate_path(p, small_cfg, 4)
        track = evolve_portfolios(path, p, exp_pos())
        value = None
        spot = path.spot
        previous = None
        for j, t in enumerate(path.times):
            hs = hedge_state(p, MarketState(t, path.x[j], path.y[j], path.qv[j]), -1j, Sign.PLUS)
            if previous is None:
                value = hs.portfolio_value
            else:
                value += previous.n_value * (hs.q_value - previous.q_value) \
                    + previous.share_count * (spot[j] - spot[j - 1])
            previous = hs
            assert track.pi_plus[j] == pytest.approx(value, rel=1e-11)

    def test_constant_claim_is_hedged_exactly(self, small_cfg):
        p = HestonParams(rho=0.5)
        errors = hedge_experiment(p, constant(), small_cfg)
        assert np.max(np.abs(errors.eps_plus)) <= 1e-12
        assert np.max(np.abs(errors.eps_minus)) <= 1e-12
        assert np.max(np.abs(errors.eps_imm)) <= 1e-12

    def test_tracks_agree_at_zero_correlation(self, default_params, small_cfg):
        path = simulate_path(default_params, small_cfg, 11)
        track = evolve_portfolios(path, default_params, exp_pos())
        for series in (track.pi_plus, track.pi_minus, track.pi_imm):
            assert np.max(np.abs(series - track.v_true)) <= 5e-3
        assert track.pi_imm[0] == pytest.approx(track.v_true[0], rel=1e-10)

    def test_value_track_ends_at_payoff(self, small_cfg):
        p = HestonParams(rho=0.66)
        path = simulate_path(p, small_cfg, 0)
        track = evolve_portfolios(path, p, exp_pos())
        assert track.v_true[-1] == pytest.approx(np.exp(path.qv[-1]), rel=1e-14)

    def test_linearity_in_payoff(self, small_cfg):
        p = HestonParams(rho=-0.66)
        batch = self._batch(p, small_cfg)
        first = PayoffSpec.from_pairs([(1.0, -1j)], "a")
        second = PayoffSpec.from_pairs([(1.0, 2j)], "b")
        mix = PayoffSpec.from_pairs([(0.3, -1j), (0.7, 2j)], "mix")
        one = evolve_batch(batch, p, first)
        two = evolve_batch(batch, p, second)
        both = evolve_batch(batch, p, mix)
        np.testing.assert_array_equal(both.pi_imm, 0.3 * one.pi_imm + 0.7 * two.pi_imm)
        np.testing.assert_array_equal(both.pi_plus, 0.3 * one.pi_plus + 0.7 * two.pi_plus)

    def test_exp_neg_real_parts_identical(self, small_cfg):
        errors = hedge_experiment(HestonParams(), exp_neg(), small_cfg.with_rho(-0.66))
        np.testing.assert_array_equal(errors.eps_plus.real, errors.eps_minus.real)
        np.testing.assert_array_equal(errors.eps_plus.imag, -errors.eps_minus.imag)

    def test_real_decreasing_payoff_stays_real(self, small_cfg):
        p = HestonParams(rho=0.66)
        batch = self._batch(p, small_cfg, 10)
        portfolios = evolve_batch(batch, p, put_payoff_spec(), with_value=False)
        assert portfolios.v_true is None
        bound = 1e-10 * (1 + np.abs(portfolios.pi_imm.real))
        assert np.all(np.abs(portfolios.pi_imm.imag) <= bound)

    def test_tables_reused(self, small_cfg):
        p = HestonParams(rho=-0.3)
        payoff = PayoffSpec.from_pairs([(1.0, 1j), (2.0, 1j)], "twice")
        tables = build_hedge_tables(p, payoff, small_cfg.time_grid(p))
        assert tables.terms[0].plus is tables.terms[1].plus
        assert tables.terms[0].qv is tables.terms[1].qv

    def test_mismatched_tables_rejected(self, small_cfg):
        p = HestonParams()
        tables = build_hedge_tables(p, exp_pos(), np.linspace(0.0, 1.0, 11))
        with pytest.raises(ParameterError):
            evolve_batch(self._batch(p, small_cfg, 2), p, exp_pos(), tables)

    def test_single_path_batch_round_trip(self, default_params, small_cfg):
        path = simulate_path(default_params, small_cfg, 2)
        batch = PathBatch.from_record(path)
        assert batch.n_paths == 1
        np.testing.assert_array_equal(batch.record(0).qv, path.qv)


class TestHedgeExperiment:
    def test_independent_of_thread_count(self, small_cfg):
        p = HestonParams(rho=0.66)
        single = hedge_experiment(p, exp_pos(), SimConfig(dt=small_cfg.dt, n_paths=600, seed=1, parallel_workers=1))
        pooled = hedge_experiment(p, exp_pos(), SimConfig(dt=small_cfg.dt, n_paths=600, seed=1, parallel_workers=4))
        np.testing.assert_array_equal(single.eps_imm, pooled.eps_imm)
        np.testing.assert_array_equal(single.eps_plus, pooled.eps_plus)
        assert len(single) == 600

    def test_progress_and_rho(self, default_params, small_cfg):
        calls = []
        errors = hedge_experiment(default_params, exp_pos(), small_cfg.with_rho(0.5),
                                  progress=lambda done, total: calls.append((done, total)))
        assert errors.rho == 0.5
        assert calls[-1] == (small_cfg.n_paths, small_cfg.n_paths)
        assert [done for done, _ in calls] == sorted(done for done, _ in calls)

    def test_cancellation(self, default_params, small_cfg):
        with pytest.raises(ExperimentCancelled):
            hedge_experiment(default_params, exp_pos(), small_cfg, cancel_check=lambda: True)

    def test_zero_correlation_errors_small(self, default_params, quick_cfg):
        summary = summarize(hedge_experiment(default_params, exp_pos(), quick_cfg))
        for name in ("plus", "minus", "immunized"):
            assert abs(summary.strategy(name).mean) <= QUICK_WIDEN * 5e-5
            assert summary.strategy(name).std <= QUICK_WIDEN * 5e-4

    def test_sign_pattern_at_strong_correlation(self, default_params, quick_cfg):
        for rho in (-0.99, 0.99):
            summary = summarize(hedge_experiment(default_params, exp_pos(), quick_cfg.with_rho(rho)))
            minus, plus, imm = summary.minus.mean.real, summary.plus.mean.real, summary.immunized.mean.real
            assert np.sign(minus) == np.sign(rho)
            assert np.sign(plus) == -np.sign(rho)
            assert abs(imm) < min(abs(plus), abs(minus))

    def test_triples(self, default_params, small_cfg):
        errors = hedge_experiment(default_params, exp_pos(), SimConfig(dt=small_cfg.dt, n_paths=3, seed=2))
        triples = errors.triples()
        assert len(triples) == 3
        assert triples[1] == (errors.eps_plus[1], errors.eps_minus[1], errors.eps_imm[1])


class TestTrackFrame:
    def test_columns_and_stride(self, default_params, small_cfg):
        path = simulate_path(default_params, small_cfg, 0)
        track = evolve_portfolios(path, default_params, exp_pos())
        frame = track_frame(path, track, stride=100)
        assert list(frame.columns[:5]) == ["path_id", "t", "x", "y", "qv"]
        assert "pi_imm_re" in frame.columns and "v_true_im" in frame.columns
        assert frame["t"].tolist() == pytest.approx([0.0, 0.4, 0.8, 1.0])

    def test_invalid_stride(self, default_params, small_cfg):
        path = simulate_path(default_params, small_cfg, 0)
        track = evolve_portfolios(path, default_params, exp_pos())
        with pytest.raises(ParameterError):
            track_frame(path, track, stride=0)

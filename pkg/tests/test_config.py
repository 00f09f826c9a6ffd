"""配置与实验配置文档测试"""

import json
from typing import List, Tuple

import pytest

from src.core.config import Config
from src.core.exceptions import ConfigError
from src.core.experiment_config import (DEFAULT_CONFIG_PATH, default_document, load_experiment_config,
                                        validate_experiment_document)
from src.core.payoffs import PayoffSpec, save_payoff


def _write(tmp_path, document, name="experiment.json"):
    path = tmp_path / name
    path.write_text(json.dumps(document), encoding="utf-8")
    return str(path)


class TestConfig:
    def test_defaults_valid(self):
        ok, errors = Config.validate_config()
        assert ok, errors

    def test_invalid_values_collected(self, monkeypatch):
        monkeypatch.setattr(Config, "PATH_CHUNK_SIZE", 0)
        monkeypatch.setattr(Config, "DEFAULT_RHO_GRID", (0.0, 1.5))
        ok, errors = Config.validate_config()
        assert not ok
        assert len(errors) == 2

    def test_annotations_use_typing_generics(self):
        # 内置泛型 tuple[...] 在 Python 3.8 上导入即失败
        assert Config.validate_config.__annotations__["return"] == Tuple[bool, List[str]]

    def test_summary(self):
        summary = Config.get_config_summary()
        assert summary["version"] == Config.APP_VERSION
        assert summary["path_chunk_size"] == 250
        assert summary["schema_version"] == 1


class TestExperimentDocument:
    def test_bundled_document_matches_defaults(self):
        with open(DEFAULT_CONFIG_PATH, "r", encoding="utf-8") as f:
            bundled = json.load(f)
        assert bundled == default_document()

    def test_defaults(self):
        config = load_experiment_config()
        assert config.model.kappa == 1.15
        assert config.sim.n_paths == 10000
        assert config.payoff.label == "exp_pos"
        assert config.rho_grid == (-0.99, -0.66, 0.0, 0.66, 0.99)
        assert config.outputs.histogram_bins == 50

    def test_partial_document_falls_back(self, tmp_path):
        path = _write(tmp_path, {"schema_version": 1, "sim": {"n_paths": 100}, "payoff": "put"})
        config = load_experiment_config(path)
        assert config.sim.n_paths == 100
        assert config.sim.dt == Config.DEFAULT_DT
        assert config.payoff_name == "put"
        assert config.source == path

    def test_overrides(self, tmp_path):
        config = load_experiment_config(overrides={
            "quick": True, "seed": 9, "workers": 2, "out": str(tmp_path), "payoff": "exp_neg", "rho": [0.5],
        })
        assert (config.sim.dt, config.sim.n_paths) == (Config.QUICK_DT, Config.QUICK_N_PATHS)
        assert config.sim.seed == 9
        assert config.sim.parallel_workers == 2
        assert config.outputs.directory == str(tmp_path)
        assert config.payoff.label == "exp_neg"
        assert config.rho_grid == (0.5,)

    def test_preset_with_parameters(self, tmp_path):
        path = _write(tmp_path, {"schema_version": 1, "payoff": {"preset": "put", "params": {"K": 0.05, "n": 10}}})
        config = load_experiment_config(path)
        assert len(config.payoff.terms) == 11
        assert config.to_dict()["payoff"] == {"preset": "put", "params": {"K": 0.05, "n": 10}}

    def test_inline_and_file_payoffs(self, tmp_path):
        spec = PayoffSpec.from_pairs([(2.0, 1j)], "double")
        config = load_experiment_config(_write(tmp_path, {"schema_version": 1, "payoff": spec.to_dict()}))
        assert config.payoff == spec
        assert config.payoff_name is None

        payoff_file = tmp_path / "payoff.json"
        save_payoff(spec, str(payoff_file))
        config = load_experiment_config(overrides={"payoff": str(payoff_file)})
        assert config.payoff == spec

    def test_errors_collected_with_paths(self, tmp_path):
        path = _write(tmp_path, {
            "schema_version": 1,
            "model": {"kappa": -1.0, "speed": 2},
            "sim": {"dt": 0.0},
            "rho_grid": [0.0, 2.0],
            "payoff": "straddle",
        })
        with pytest.raises(ConfigError) as info:
            load_experiment_config(path)
        errors = info.value.errors
        for prefix in ("model.kappa", "model.speed", "sim.dt", "rho_grid[1]", "payoff"):
            assert any(e.startswith(prefix) for e in errors), (prefix, errors)

    def test_schema_version_mismatch(self, tmp_path):
        with pytest.raises(ConfigError) as info:
            load_experiment_config(_write(tmp_path, {"schema_version": 2}))
        assert info.value.errors[0].startswith("schema_version")

    def test_unreadable_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_experiment_config(str(bad))
        with pytest.raises(ConfigError):
            load_experiment_config(str(tmp_path / "missing.json"))

    def test_non_integral_grid_reported(self, tmp_path):
        path = _write(tmp_path, {"schema_version": 1, "sim": {"dt": 0.3}})
        config = load_experiment_config(path)
        from src.core.exceptions import ParameterError
        with pytest.raises(ParameterError):
            config.sim.n_steps(config.model)

    def test_validate_document_directly(self):
        ok, errors = validate_experiment_document(default_document())
        assert ok and errors == []
        document = default_document()
        document["outputs"]["svg"] = "yes"
        document["extra"] = 1
        ok, errors = validate_experiment_document(document)
        assert not ok
        assert "outputs.svg: 必须是布尔值" in errors
        assert any(e.startswith("extra") for e in errors)

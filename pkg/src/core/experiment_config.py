"""
实验配置模块

该模块负责实验配置文档的读取、合并与校验，包括：
- JSON 配置文档（带 schema_version）的加载
- 缺省字段回退到内置默认值
- 命令行参数覆盖
- 收集全部字段错误后统一报告

主要类与函数：
- OutputOptions: 输出选项
- ExperimentConfig: 完整实验配置
- default_document / validate_experiment_document / load_experiment_config

作者: QVHedge 开发团队
版本: 1.0.0
"""

import copy
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

from .config import Config
from .exceptions import ConfigError, ParameterError
from .heston_model import HestonParams
from .mc_engine import SimConfig
from .payoffs import PRESETS, PayoffSpec, preset_payoff, resolve_payoff
from ..utils.logger import get_logger

logger = get_logger(__name__)

# 仓库自带的默认实验文档
DEFAULT_CONFIG_PATH = Path(__file__).resolve().parents[2] / "config" / "default_experiment.json"

_MODEL_FIELDS = ("x0", "y0", "kappa", "theta", "delta", "rho", "t_final")
_SIM_FIELDS = ("dt", "n_paths", "seed", "rho_override", "parallel_workers")
_OUTPUT_FIELDS = ("directory", "svg", "json", "path_stride", "histogram_bins")


@dataclass(frozen=True)
class OutputOptions:
    """输出目录与格式开关"""
    directory: str = Config.DEFAULT_OUTPUT_DIR
    svg: bool = True
    json: bool = True
    path_stride: int = Config.DEFAULT_PATH_STRIDE
    histogram_bins: int = Config.HISTOGRAM_BINS


@dataclass(frozen=True)
class ExperimentConfig:
    """
    实验配置

    Attributes:
        model: 模型参数
        sim: 模拟配置
        payoff: 收益
        payoff_name: 预设名称，内联收益为 None
        rho_grid: 相关系数网格
        outputs: 输出选项
        source: 配置文件路径
    """
    model: HestonParams
    sim: SimConfig
    payoff: PayoffSpec
    payoff_name: Optional[str] = None
    payoff_params: Dict[str, Any] = field(default_factory=dict)
    rho_grid: Tuple[float, ...] = Config.DEFAULT_RHO_GRID
    outputs: OutputOptions = field(default_factory=OutputOptions)
    source: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        """回显到 JSON 摘要中的配置"""
        return {
            "schema_version": Config.CONFIG_SCHEMA_VERSION,
            "model": asdict(self.model),
            "sim": asdict(self.sim),
            "payoff": (
                {"preset": self.payoff_name, "params": dict(self.payoff_params)}
                if self.payoff_name else self.payoff.to_dict()
            ),
            "rho_grid": list(self.rho_grid),
            "outputs": asdict(self.outputs),
            "source": self.source,
        }


def default_document() -> Dict[str, Any]:
    """由内置默认值构造的完整配置文档"""
    return {
        "schema_version": Config.CONFIG_SCHEMA_VERSION,
        "model": asdict(HestonParams()),
        "sim": asdict(SimConfig()),
        "payoff": "exp_pos",
        "rho_grid": list(Config.DEFAULT_RHO_GRID),
        "outputs": asdict(OutputOptions()),
    }


def _merge(base: Dict[str, Any], update: Mapping[str, Any]) -> Dict[str, Any]:
    """递归合并字典，payoff 整体替换"""
    result = copy.deepcopy(base)
    for key, value in update.items():
        if key != "payoff" and isinstance(value, Mapping) and isinstance(result.get(key), dict):
            result[key] = _merge(result[key], value)
        else:
            result[key] = copy.deepcopy(value)
    return result


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def validate_experiment_document(document: Mapping[str, Any]) -> Tuple[bool, List[str]]:
    """
    校验合并后的配置文档

    Args:
        document: 配置文档

    Returns:
        Tuple[bool, List[str]]: (是否有效, "字段路径: 错误信息" 列表)
    """
    errors: List[str] = []

    version = document.get("schema_version")
    if version != Config.CONFIG_SCHEMA_VERSION:
        errors.append(f"schema_version: 期望 {Config.CONFIG_SCHEMA_VERSION}，实际 {version!r}")

    known = {"schema_version", "model", "sim", "payoff", "rho_grid", "outputs"}
    for key in document:
        if key not in known:
            errors.append(f"{key}: 未知字段")

    for block, names in (("model", _MODEL_FIELDS), ("sim", _SIM_FIELDS), ("outputs", _OUTPUT_FIELDS)):
        section = document.get(block)
        if not isinstance(section, Mapping):
            errors.append(f"{block}: 必须是对象")
            continue
        for key in section:
            if key not in names:
                errors.append(f"{block}.{key}: 未知字段")

    model = document.get("model")
    if isinstance(model, Mapping):
        for key in _MODEL_FIELDS:
            value = model.get(key)
            if not _is_number(value):
                errors.append(f"model.{key}: 必须是数值")
            elif key in ("y0", "kappa", "theta", "delta", "t_final") and value <= 0:
                errors.append(f"model.{key}: 必须大于0")
            elif key == "rho" and abs(value) > 1:
                errors.append("model.rho: 必须在[-1, 1]内")

    sim = document.get("sim")
    if isinstance(sim, Mapping):
        if not _is_number(sim.get("dt")) or sim.get("dt") <= 0:
            errors.append("sim.dt: 必须是正数")
        if not isinstance(sim.get("n_paths"), int) or isinstance(sim.get("n_paths"), bool) or sim["n_paths"] < 1:
            errors.append("sim.n_paths: 必须是正整数")
        seed = sim.get("seed")
        if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2 ** 64:
            errors.append("sim.seed: 必须是64位无符号整数")
        override = sim.get("rho_override")
        if override is not None and (not _is_number(override) or abs(override) > 1):
            errors.append("sim.rho_override: 必须为 null 或 [-1, 1] 内的数值")
        workers = sim.get("parallel_workers")
        if workers is not None and (not isinstance(workers, int) or workers < 1):
            errors.append("sim.parallel_workers: 必须为 null 或正整数")

    grid = document.get("rho_grid")
    if not isinstance(grid, list) or not grid:
        errors.append("rho_grid: 必须是非空列表")
    else:
        for index, rho in enumerate(grid):
            if not _is_number(rho) or abs(rho) > 1:
                errors.append(f"rho_grid[{index}]: 必须在[-1, 1]内，当前值 {rho!r}")

    payoff = document.get("payoff")
    if isinstance(payoff, str):
        if payoff not in PRESETS and not os.path.isfile(payoff):
            errors.append(f"payoff: 未知的预设收益或文件 {payoff!r}")
    elif isinstance(payoff, Mapping):
        if "preset" in payoff:
            if payoff["preset"] not in PRESETS:
                errors.append(f"payoff.preset: 未知的预设收益 {payoff['preset']!r}")
            if not isinstance(payoff.get("params", {}), Mapping):
                errors.append("payoff.params: 必须是对象")
        elif "terms" not in payoff:
            errors.append("payoff: 内联收益需要 terms 字段")
    else:
        errors.append("payoff: 必须是预设名称、文件路径或收益对象")

    outputs = document.get("outputs")
    if isinstance(outputs, Mapping):
        if not isinstance(outputs.get("directory"), str) or not outputs.get("directory"):
            errors.append("outputs.directory: 必须是非空字符串")
        for flag in ("svg", "json"):
            if not isinstance(outputs.get(flag), bool):
                errors.append(f"outputs.{flag}: 必须是布尔值")
        for count in ("path_stride", "histogram_bins"):
            value = outputs.get(count)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                errors.append(f"outputs.{count}: 必须是正整数")

    return len(errors) == 0, errors


def _build_payoff(payoff: Any) -> Tuple[PayoffSpec, Optional[str], Dict[str, Any]]:
    if isinstance(payoff, str):
        return resolve_payoff(payoff), (payoff if payoff in PRESETS else None), {}
    if "preset" in payoff:
        params = dict(payoff.get("params", {}))
        return preset_payoff(payoff["preset"], **params), payoff["preset"], params
    return PayoffSpec.from_dict(payoff), None, {}


def _apply_overrides(document: Dict[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    """命令行参数覆盖配置文档"""
    if overrides.get("quick"):
        document["sim"]["dt"] = Config.QUICK_DT
        document["sim"]["n_paths"] = Config.QUICK_N_PATHS
    if overrides.get("seed") is not None:
        document["sim"]["seed"] = overrides["seed"]
    if overrides.get("workers") is not None:
        document["sim"]["parallel_workers"] = overrides["workers"]
    if overrides.get("out") is not None:
        document["outputs"]["directory"] = overrides["out"]
    if overrides.get("payoff") is not None:
        document["payoff"] = overrides["payoff"]
    if overrides.get("rho") is not None:
        document["rho_grid"] = list(overrides["rho"])
    return document


def load_experiment_config(path: Optional[str] = None,
                           overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """
    加载实验配置

    文档中缺失的块和字段回退到内置默认值，之后应用命令行覆盖并统一校验。

    Args:
        path: 配置文件路径，None 表示只使用默认值
        overrides: quick / seed / workers / out / payoff / rho

    Returns:
        ExperimentConfig: 实验配置

    Raises:
        ConfigError: 文件无法读取或校验失败
    """
    document = default_document()
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as f:
                loaded = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError([f"{path}: 无法读取配置文件: {e}"]) from e
        if not isinstance(loaded, Mapping):
            raise ConfigError([f"{path}: 顶层必须是对象"])
        document = _merge(document, loaded)
        logger.info(f"已加载实验配置: {path}")

    document = _apply_overrides(document, overrides or {})
    ok, errors = validate_experiment_document(document)
    if not ok:
        raise ConfigError(errors)

    try:
        model = HestonParams(**document["model"])
        sim = SimConfig(**document["sim"])
        payoff, payoff_name, payoff_params = _build_payoff(document["payoff"])
        outputs = OutputOptions(**document["outputs"])
    except ParameterError as e:
        raise ConfigError([str(e)]) from e

    return ExperimentConfig(
        model=model,
        sim=sim,
        payoff=payoff,
        payoff_name=payoff_name,
        payoff_params=payoff_params,
        rho_grid=tuple(float(r) for r in document["rho_grid"]),
        outputs=outputs,
        source=path,
    )

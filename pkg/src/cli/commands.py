"""
实验命令模块

该模块实现命令行的各个实验命令，负责：
- sweep-rho: 初始价格随相关系数的变化
- paths: 单条样本路径上的组合轨迹
- table: 对冲误差统计表
- hist: 对冲误差直方图
- payoff-plot: 近似收益与目标收益对比
- density: 二次变差密度

每个命令先写数据文件（CSV），再写 JSON 摘要，最后从数据文件渲染 SVG。

作者: QVHedge 开发团队
版本: 1.0.0
"""

import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from ..core.carr_lee import initial_prices
from ..core.config import Config
from ..core.exceptions import ConfigError, ParameterError
from ..core.experiment_config import ExperimentConfig
from ..core.heston_model import qv_density, qv_mean
from ..core.mc_engine import HedgeErrors, evolve_portfolios, hedge_experiment, simulate_path, track_frame
from ..core.payoffs import bernstein_curve, eval_payoff, payoff_target
from ..core.stats import (ErrorSummary, default_convention, error_table, render_table_text,
                          shared_histograms, summarize)
from ..utils import plotting
from ..utils.file_utils import ensure_directory, output_path, write_csv, write_json
from ..utils.logger import get_logger
from ..workers.experiment_worker import ExperimentRunner

logger = get_logger(__name__)


@dataclass
class CommandResult:
    """命令的输出：数据、写出的文件与摘要"""
    command: str
    data: Any
    files: List[str] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)


def _summary(command: str, config: ExperimentConfig, started: float, **extra) -> Dict[str, Any]:
    summary = {
        "command": command,
        "config": config.to_dict(),
        "app": Config.get_config_summary(),
        "seed": config.sim.seed,
        "wall_time_seconds": round(time.perf_counter() - started, 3),
    }
    summary.update(extra)
    return summary


def _finish(result: CommandResult, config: ExperimentConfig, render: Sequence[Callable[[], str]]) -> CommandResult:
    """写 JSON 摘要，再按需渲染 SVG"""
    label = config.payoff.label
    if config.outputs.json:
        path = output_path(config.outputs.directory, result.command, label, "json")
        result.files.append(write_json(result.summary, path))
    if config.outputs.svg:
        for draw in render:
            result.files.append(draw())
    return result


def _price_row(rho: float, prices) -> Dict[str, float]:
    row = {"rho": rho}
    for name in ("pi_plus", "pi_minus", "pi_imm", "v_true"):
        value = getattr(prices, name)
        row[f"{name}_re"] = value.real
        row[f"{name}_im"] = value.imag
    return row


def cmd_sweep_rho(config: ExperimentConfig, points: int = Config.SWEEP_POINTS) -> CommandResult:
    """
    Π₀⁺、Π₀⁻、Π₀ 与 V₀ 在 [-1, 1] 上的 ρ 扫描

    Args:
        config: 实验配置
        points: 网格点数

    Returns:
        CommandResult: data 为扫描表
    """
    if points < 2:
        raise ConfigError([f"points: 至少需要2个网格点，当前值 {points}"])
    started = time.perf_counter()
    out = ensure_directory(config.outputs.directory)
    label = config.payoff.label

    rows = [_price_row(float(rho), initial_prices(config.model.with_rho(float(rho)), config.payoff))
            for rho in np.linspace(-1.0, 1.0, points)]
    frame = pd.DataFrame(rows)
    csv_path = write_csv(frame, output_path(out, "sweep-rho", label, "csv"))

    zero = frame.loc[frame["rho"] == 0.0]
    result = CommandResult("sweep-rho", frame, [csv_path])
    result.summary = _summary("sweep-rho", config, started, points=points,
                              rho_zero=zero.to_dict("records")[0] if len(zero) else None)
    svg_path = output_path(out, "sweep-rho", label, "svg")
    return _finish(result, config, [lambda: plotting.plot_sweep(csv_path, svg_path, label)])


def _run_per_rho(config: ExperimentConfig, make_task: Callable[[float], Callable]) -> List[Any]:
    runner = ExperimentRunner()
    return runner.run([(rho, make_task(rho)) for rho in config.rho_grid])


def cmd_paths(config: ExperimentConfig, path_id: int = 0) -> CommandResult:
    """
    导出每个 ρ 下指定路径的 Π⁺、Π⁻、Π 与 V 轨迹

    Args:
        config: 实验配置
        path_id: 路径编号

    Returns:
        CommandResult: data 为 {ρ: 轨迹表}
    """
    if not 0 <= path_id < config.sim.n_paths:
        raise ConfigError([f"path_id: {path_id} 超出范围 [0, {config.sim.n_paths})"])
    started = time.perf_counter()
    out = ensure_directory(config.outputs.directory)
    label = config.payoff.label
    stride = config.outputs.path_stride

    def make_task(rho: float):
        def task(progress, cancel_check):
            params = config.model.with_rho(rho)
            record = simulate_path(params, config.sim.with_rho(None), path_id)
            track = evolve_portfolios(record, params, config.payoff)
            progress(1, 1)
            return record, track
        return task

    outcomes = _run_per_rho(config, make_task)
    frames: Dict[float, pd.DataFrame] = {}
    result = CommandResult("paths", frames)
    render = []
    terminal = {}
    for rho, (record, track) in zip(config.rho_grid, outcomes):
        frame = track_frame(record, track, stride)
        frames[rho] = frame
        csv_path = write_csv(frame, output_path(out, "paths", label, "csv", rho))
        result.files.append(csv_path)
        svg_path = output_path(out, "paths", label, "svg", rho)
        render.append(lambda c=csv_path, s=svg_path, r=rho: plotting.plot_paths(c, s, f"{label} ρ={r:+.2f}"))
        terminal[f"{rho:+.2f}"] = {
            "pi_plus": track.pi_plus[-1], "pi_minus": track.pi_minus[-1],
            "pi_imm": track.pi_imm[-1], "v_true": track.v_true[-1],
            "negative_y_clamps": record.negative_y_clamps,
        }

    result.summary = _summary("paths", config, started, path_id=path_id, stride=stride, terminal=terminal)
    return _finish(result, config, render)


def run_hedge_experiments(config: ExperimentConfig) -> List[HedgeErrors]:
    """在 ρ 网格上并发运行对冲实验，结果按网格顺序返回"""

    def make_task(rho: float):
        def task(progress, cancel_check):
            return hedge_experiment(config.model.with_rho(rho), config.payoff, config.sim.with_rho(None),
                                    progress=progress, cancel_check=cancel_check)
        return task

    logger.info(
        f"对冲实验: 收益={config.payoff.label}, 路径数={config.sim.n_paths}, "
        f"dt={config.sim.dt:g}, ρ网格={list(config.rho_grid)}"
    )
    return _run_per_rho(config, make_task)


def cmd_table(config: ExperimentConfig) -> CommandResult:
    """
    对冲误差统计表

    Args:
        config: 实验配置

    Returns:
        CommandResult: data 为 {"table": 表, "summaries": {ρ: ErrorSummary}, "errors": {ρ: HedgeErrors}}
    """
    started = time.perf_counter()
    out = ensure_directory(config.outputs.directory)
    label = config.payoff.label
    convention = default_convention(config.payoff)

    errors = dict(zip(config.rho_grid, run_hedge_experiments(config)))
    summaries: Dict[float, ErrorSummary] = {rho: summarize(e, convention) for rho, e in errors.items()}
    table = error_table(summaries)

    files = [write_csv(table, output_path(out, "table", label, "csv"), index=True)]
    text_path = output_path(out, "table", label, "txt")
    with open(text_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(render_table_text(table))
    files.append(text_path)
    logger.info(f"对冲误差表 ({label}, {convention.value}):\n{render_table_text(table)}")

    result = CommandResult("table", {"table": table, "summaries": summaries, "errors": errors}, files)
    result.summary = _summary(
        "table", config, started,
        convention=convention.value,
        summaries={f"{rho:+.2f}": s.to_dict() for rho, s in summaries.items()},
        negative_y_clamps={f"{rho:+.2f}": e.negative_y_clamps for rho, e in errors.items()},
    )
    return _finish(result, config, [])


def cmd_hist(config: ExperimentConfig, bin_count: Optional[int] = None) -> CommandResult:
    """
    三种策略误差实部的共享分箱直方图

    Args:
        config: 实验配置
        bin_count: 分箱数，None 表示使用配置

    Returns:
        CommandResult: data 为 {ρ: 直方图表}
    """
    started = time.perf_counter()
    out = ensure_directory(config.outputs.directory)
    label = config.payoff.label
    bins = bin_count or config.outputs.histogram_bins

    frames: Dict[float, pd.DataFrame] = {}
    result = CommandResult("hist", frames)
    render = []
    clamps = {}
    for rho, errors in zip(config.rho_grid, run_hedge_experiments(config)):
        frame = shared_histograms({
            "plus": errors.eps_plus.real,
            "minus": errors.eps_minus.real,
            "immunized": errors.eps_imm.real,
        }, bins)
        frames[rho] = frame
        csv_path = write_csv(frame, output_path(out, "hist", label, "csv", rho))
        result.files.append(csv_path)
        svg_path = output_path(out, "hist", label, "svg", rho)
        render.append(lambda c=csv_path, s=svg_path, r=rho: plotting.plot_histograms(c, s, f"{label} ρ={r:+.2f}"))
        clamps[f"{rho:+.2f}"] = errors.negative_y_clamps

    result.summary = _summary("hist", config, started, bins=bins, negative_y_clamps=clamps)
    return _finish(result, config, render)


def cmd_payoff_plot(config: ExperimentConfig) -> CommandResult:
    """
    Bernstein 近似收益与目标收益的对比，背景为二次变差密度

    Args:
        config: 实验配置（收益必须是 put 或 volswap 预设）

    Returns:
        CommandResult: data 为对比表
    """
    if config.payoff_name not in ("put", "volswap"):
        raise ConfigError([f"payoff: payoff-plot 只支持 put 或 volswap 预设，当前为 {config.payoff_name or '内联收益'}"])
    started = time.perf_counter()
    out = ensure_directory(config.outputs.directory)
    label = config.payoff.label

    low, high = Config.PAYOFF_PLOT_RANGE
    grid = np.linspace(low, high, Config.PAYOFF_PLOT_POINTS)
    target = payoff_target(config.payoff_name, **config.payoff_params)
    approximation = eval_payoff(config.payoff, grid)
    frame = pd.DataFrame({
        "qv": grid,
        "target": target(grid),
        "approximation_re": approximation.real,
        "approximation_im": approximation.imag,
        "bernstein_basis": bernstein_curve(config.payoff_name, grid, **config.payoff_params),
        "density": qv_density(config.model, grid),
    })
    csv_path = write_csv(frame, output_path(out, "payoff-plot", label, "csv"))

    wide = np.linspace(0.0, Config.DENSITY_PLOT_UPPER, Config.DENSITY_PLOT_POINTS)
    error = np.abs(frame["approximation_re"] - frame["target"])
    result = CommandResult("payoff-plot", frame, [csv_path])
    result.summary = _summary(
        "payoff-plot", config, started,
        max_abs_error=float(error.max()),
        argmax_error=float(grid[int(error.values.argmax())]),
        max_basis_gap=float(np.max(np.abs(frame["bernstein_basis"] - frame["approximation_re"]))),
        density_mass=float(trapezoid(qv_density(config.model, wide), wide)),
    )
    svg_path = output_path(out, "payoff-plot", label, "svg")
    return _finish(result, config, [lambda: plotting.plot_payoff(csv_path, svg_path, label)])


def cmd_density(config: ExperimentConfig, upper: float = Config.DENSITY_PLOT_UPPER,
                points: int = Config.DENSITY_PLOT_POINTS) -> CommandResult:
    """
    二次变差密度及其质量、均值诊断

    Args:
        config: 实验配置
        upper: 网格上限
        points: 网格点数

    Returns:
        CommandResult: data 为密度表
    """
    if upper <= 0 or points < 2:
        raise ParameterError(f"密度网格无效: upper={upper}, points={points}")
    started = time.perf_counter()
    out = ensure_directory(config.outputs.directory)
    label = "qv"

    grid = np.linspace(0.0, upper, points)
    density = qv_density(config.model, grid)
    frame = pd.DataFrame({"qv": grid, "density": density})
    csv_path = write_csv(frame, output_path(out, "density", label, "csv"))

    mass = float(trapezoid(density, grid))
    mean = float(trapezoid(grid * density, grid))
    logger.info(f"二次变差密度: 质量={mass:.6f}, 均值={mean:.6f}, 理论均值={qv_mean(config.model):.6f}")

    result = CommandResult("density", frame, [csv_path])
    result.summary = _summary("density", config, started, mass=mass, mean=mean,
                              expected_mean=qv_mean(config.model), upper=upper, points=points)
    if config.outputs.json:
        result.files.append(write_json(result.summary, output_path(out, "density", label, "json")))
    if config.outputs.svg:
        result.files.append(plotting.plot_density(csv_path, output_path(out, "density", label, "svg")))
    return result

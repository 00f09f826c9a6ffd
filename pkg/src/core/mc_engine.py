"""
蒙特卡洛引擎模块

该模块负责 Heston 路径的模拟和对冲组合沿路径的离散演化，包括：
- Euler-Maruyama 离散化的 (X, Y, <X>) 路径
- 基于计数器的逐路径随机数流
- 基本组合 Π±、免疫组合 Π 与真实价值 V 的离散递推
- 分块并行的对冲实验与误差计算
- 路径导出表

主要类与函数：
- SimConfig: 模拟配置
- PathRecord / PathBatch: 单条路径与向量化路径块
- PortfolioTrack / PortfolioBatch: 组合轨迹
- HedgeTables: 沿时间网格预计算的系数表
- simulate_paths / simulate_batch / evolve_portfolios / evolve_batch / hedge_experiment

作者: QVHedge 开发团队
版本: 1.0.0
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import ndtri

from .carr_lee import ExponentPair, ImmunizationWeights, exponents, immunization_weights
from .config import Config
from .exceptions import ExperimentCancelled, NumericalOverflowError, ParameterError
from .heston_model import CharacteristicTable, HestonParams, QVTable, cf_table, qv_table
from .payoffs import PayoffSpec, eval_payoff
from ..utils.logger import get_logger

logger = get_logger(__name__)

# 均匀数裁剪到开区间，保证 ndtri 有限
_UNIFORM_FLOOR = 2.0 ** -53

ProgressCallback = Callable[[int, int], None]
CancelCheck = Callable[[], bool]


@dataclass(frozen=True)
class SimConfig:
    """
    模拟配置

    Attributes:
        dt: 时间步长（年）
        n_paths: 路径数
        seed: 64 位随机种子
        rho_override: 覆盖模型相关系数，None 表示使用模型参数
        parallel_workers: 路径级并行线程数，None 表示自动
    """
    dt: float = Config.DEFAULT_DT
    n_paths: int = Config.DEFAULT_N_PATHS
    seed: int = Config.DEFAULT_SEED
    rho_override: Optional[float] = None
    parallel_workers: Optional[int] = Config.DEFAULT_PARALLEL_WORKERS

    def __post_init__(self):
        errors = []
        if not (np.isfinite(self.dt) and self.dt > 0):
            errors.append(f"dt 必须大于0，当前值: {self.dt}")
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            errors.append(f"n_paths 必须是正整数，当前值: {self.n_paths}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            errors.append(f"seed 必须是64位无符号整数，当前值: {self.seed}")
        if self.rho_override is not None and not abs(self.rho_override) <= 1:
            errors.append(f"rho_override 必须在[-1, 1]内，当前值: {self.rho_override}")
        if self.parallel_workers is not None and self.parallel_workers < 1:
            errors.append(f"parallel_workers 必须至少为1，当前值: {self.parallel_workers}")
        if errors:
            raise ParameterError("; ".join(errors))

    @classmethod
    def quick(cls, **kwargs) -> "SimConfig":
        """CI 用的小规模配置"""
        kwargs.setdefault("dt", Config.QUICK_DT)
        kwargs.setdefault("n_paths", Config.QUICK_N_PATHS)
        return cls(**kwargs)

    def n_steps(self, p: HestonParams) -> int:
        """T/dt 必须是整数"""
        ratio = p.t_final / self.dt
        steps = int(round(ratio))
        if steps < 1 or not math.isclose(ratio, steps, rel_tol=1e-12, abs_tol=0.0):
            raise ParameterError(f"T/dt = {ratio!r} 不是整数，时间网格无法精确覆盖 [0, T]")
        return steps

    def time_grid(self, p: HestonParams) -> np.ndarray:
        return np.linspace(0.0, p.t_final, self.n_steps(p) + 1)

    def effective_params(self, p: HestonParams) -> HestonParams:
        if self.rho_override is None:
            return p
        return p.with_rho(self.rho_override)

    def resolved_workers(self) -> int:
        if self.parallel_workers is not None:
            return int(self.parallel_workers)
        return max(1, min(Config.MAX_PARALLEL_WORKERS, os.cpu_count() or 1))

    def with_rho(self, rho: Optional[float]) -> "SimConfig":
        return replace(self, rho_override=rho)


@dataclass
class PathRecord:
    """单条模拟路径，qv 单调不减且 qv[0] = 0"""
    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    qv: np.ndarray
    negative_y_clamps: int = 0
    path_id: int = 0

    @property
    def spot(self) -> np.ndarray:
        return np.exp(self.x + 0j).real


@dataclass
class PathBatch:
    """一组路径，数组形状为 (步数+1, 路径数)"""
    path_ids: np.ndarray
    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    qv: np.ndarray
    negative_y_clamps: np.ndarray

    @property
    def n_paths(self) -> int:
        return int(self.path_ids.size)

    @property
    def spot(self) -> np.ndarray:
        # 与 u = -i 处的欧式腿使用同一条复指数路径
        return np.exp(self.x + 0j).real

    def record(self, i: int) -> PathRecord:
        return PathRecord(
            times=self.times,
            x=self.x[:, i].copy(),
            y=self.y[:, i].copy(),
            qv=self.qv[:, i].copy(),
            negative_y_clamps=int(self.negative_y_clamps[i]),
            path_id=int(self.path_ids[i]),
        )

    @classmethod
    def from_record(cls, path: PathRecord) -> "PathBatch":
        return cls(
            path_ids=np.array([path.path_id]),
            times=np.asarray(path.times, dtype=float),
            x=np.asarray(path.x, dtype=float)[:, None],
            y=np.asarray(path.y, dtype=float)[:, None],
            qv=np.asarray(path.qv, dtype=float)[:, None],
            negative_y_clamps=np.array([path.negative_y_clamps]),
        )


@dataclass
class PortfolioTrack:
    """单条路径上的 Π⁺、Π⁻、Π 与 V"""
    pi_plus: np.ndarray
    pi_minus: np.ndarray
    pi_imm: np.ndarray
    v_true: Optional[np.ndarray] = None


@dataclass
class PortfolioBatch:
    pi_plus: np.ndarray
    pi_minus: np.ndarray
    pi_imm: np.ndarray
    v_true: Optional[np.ndarray] = None

    def track(self, i: int) -> PortfolioTrack:
        return PortfolioTrack(
            pi_plus=self.pi_plus[:, i].copy(),
            pi_minus=self.pi_minus[:, i].copy(),
            pi_imm=self.pi_imm[:, i].copy(),
            v_true=None if self.v_true is None else self.v_true[:, i].copy(),
        )


@dataclass(frozen=True)
class TermTables:
    """单个收益项的指数、权重与系数表"""
    a: complex
    s: complex
    pair: ExponentPair
    weights: ImmunizationWeights
    plus: CharacteristicTable
    minus: CharacteristicTable
    qv: QVTable


@dataclass(frozen=True)
class HedgeTables:
    """整个收益的预计算表，构造后只读，可在线程间共享"""
    times: np.ndarray
    terms: Tuple[TermTables, ...]


@dataclass
class HedgeErrors:
    """
    逐路径的对冲误差 ε = Π_T - φ(<X>_T)

    Attributes:
        eps_plus / eps_minus / eps_imm: 三种策略的误差（按路径编号排序）
        negative_y_clamps: 负方差截断总次数
    """
    eps_plus: np.ndarray
    eps_minus: np.ndarray
    eps_imm: np.ndarray
    negative_y_clamps: int = 0
    rho: float = 0.0

    def __len__(self) -> int:
        return int(self.eps_imm.size)

    def triples(self) -> List[Tuple[complex, complex, complex]]:
        return list(zip(self.eps_plus.tolist(), self.eps_minus.tolist(), self.eps_imm.tolist()))


def build_hedge_tables(p: HestonParams, payoff: PayoffSpec, times: np.ndarray) -> HedgeTables:
    """
    为收益的每一项预计算 C/D 与 A/B 表

    表按 u 与 s 缓存，相同指数只计算一次。

    Args:
        p: 模型参数（含真实相关系数）
        payoff: 收益
        times: 时间网格

    Returns:
        HedgeTables: 预计算表
    """
    times = np.asarray(times, dtype=float)
    cf_cache: Dict[complex, CharacteristicTable] = {}
    qv_cache: Dict[complex, QVTable] = {}

    def cached_cf(u: complex) -> CharacteristicTable:
        if u not in cf_cache:
            cf_cache[u] = cf_table(p, times, u)
        return cf_cache[u]

    terms = []
    for term in payoff.terms:
        pair = exponents(term.s)
        weights = immunization_weights(term.s)
        if term.s not in qv_cache:
            qv_cache[term.s] = qv_table(p, times, term.s)
        terms.append(TermTables(
            a=term.a,
            s=term.s,
            pair=pair,
            weights=weights,
            plus=cached_cf(pair.u_plus),
            minus=cached_cf(pair.u_minus),
            qv=qv_cache[term.s],
        ))
    return HedgeTables(times=times, terms=tuple(terms))


def _path_normals(seed: int, path_id: int, n_steps: int) -> np.ndarray:
    """
    路径 path_id 的独立标准正态增量，形状 (n_steps, 2)

    Philox 的密钥为种子，计数器最高位为路径编号，因此每条路径的随机数
    只取决于 (seed, path_id)。
    """
    counter = np.array([0, 0, 0, path_id], dtype=np.uint64)
    bit_generator = np.random.Philox(counter=counter, key=int(seed))
    uniforms = np.random.Generator(bit_generator).random((n_steps, 2))
    np.clip(uniforms, _UNIFORM_FLOOR, 1.0 - _UNIFORM_FLOOR, out=uniforms)
    return ndtri(uniforms)


def simulate_batch(p: HestonParams, cfg: SimConfig, path_ids: Sequence[int]) -> PathBatch:
    """
    用 Euler-Maruyama 模拟一组路径

    X 漂移与两个扩散项使用 max(Y, 0)，每次截断按路径计数。

    Args:
        p: 模型参数（使用 p.rho）
        cfg: 模拟配置
        path_ids: 路径编号

    Returns:
        PathBatch: 路径块
    """
    path_ids = np.asarray(path_ids, dtype=np.int64)
    if np.any(path_ids < 0):
        raise ParameterError("路径编号不能为负数")
    steps = cfg.n_steps(p)
    times = cfg.time_grid(p)
    m = path_ids.size

    normals = np.empty((steps, 2, m))
    for column, path_id in enumerate(path_ids):
        normals[:, :, column] = _path_normals(cfg.seed, int(path_id), steps)

    dt = cfg.dt
    sqrt_dt = math.sqrt(dt)
    rho = p.rho
    rho_bar = math.sqrt(max(1.0 - rho * rho, 0.0))

    x = np.empty((steps + 1, m))
    y = np.empty((steps + 1, m))
    qv = np.empty((steps + 1, m))
    clamps = np.zeros(m, dtype=np.int64)
    x[0] = p.x0
    y[0] = p.y0
    qv[0] = 0.0

    for j in range(steps):
        y_now = y[j]
        negative = y_now < 0.0
        clamps += negative
        y_pos = np.where(negative, 0.0, y_now)
        vol = np.sqrt(y_pos)
        dw1 = sqrt_dt * normals[j, 0]
        dw2 = sqrt_dt * normals[j, 1]
        dw = rho_bar * dw1 + rho * dw2
        x[j + 1] = x[j] - 0.5 * y_pos * dt + vol * dw
        y[j + 1] = y_now + p.kappa * (p.theta - y_now) * dt + p.delta * vol * dw2
        increment = x[j + 1] - x[j]
        qv[j + 1] = qv[j] + increment * increment

    return PathBatch(path_ids=path_ids, times=times, x=x, y=y, qv=qv, negative_y_clamps=clamps)


def _chunks(n_paths: int) -> List[np.ndarray]:
    size = Config.PATH_CHUNK_SIZE
    return [np.arange(start, min(start + size, n_paths)) for start in range(0, n_paths, size)]


def simulate_paths(p: HestonParams, cfg: SimConfig) -> Iterator[PathRecord]:
    """按路径编号顺序逐条产出路径，块划分与 hedge_experiment 相同"""
    p = cfg.effective_params(p)
    for ids in _chunks(cfg.n_paths):
        batch = simulate_batch(p, cfg, ids)
        for i in range(batch.n_paths):
            yield batch.record(i)


def simulate_path(p: HestonParams, cfg: SimConfig, path_id: int) -> PathRecord:
    """模拟单条路径，与批量实验中同编号的路径逐位一致"""
    if not 0 <= path_id < cfg.n_paths:
        raise ParameterError(f"路径编号 {path_id} 超出范围 [0, {cfg.n_paths})")
    size = Config.PATH_CHUNK_SIZE
    start = (path_id // size) * size
    ids = np.arange(start, min(start + size, cfg.n_paths))
    batch = simulate_batch(cfg.effective_params(p), cfg, ids)
    return batch.record(path_id - start)


def _term_track(u: complex, s: complex, table: CharacteristicTable, batch: PathBatch,
                spot: np.ndarray) -> np.ndarray:
    """
    单个指数收益的离散自融资组合

    Π_{j+1} = Π_j + N_j (Q_{j+1} - Q_j) + h_j (S_{j+1} - S_j)，
    h_j = -iu N_j Q_j / S_j，N 与 Q 均取左端点。
    """
    n_value = np.exp(-1j * u * batch.x + 1j * s * batch.qv)
    q_value = table.value(batch.x, batch.y)
    nq = n_value * q_value
    shares = -1j * u * nq / spot
    increments = n_value[:-1] * (q_value[1:] - q_value[:-1]) + shares[:-1] * (spot[1:] - spot[:-1])
    return np.cumsum(np.concatenate([nq[:1], increments], axis=0), axis=0)


def evolve_batch(batch: PathBatch, p: HestonParams, payoff: PayoffSpec,
                 tables: Optional[HedgeTables] = None, with_value: bool = True) -> PortfolioBatch:
    """
    沿一组路径演化 Π⁺、Π⁻、Π 与 V

    各项按收益中的顺序从零开始累加。

    Args:
        batch: 路径块
        p: 模型参数（欧式腿按真实相关系数定价）
        payoff: 收益
        tables: 预计算表，None 时现场构造
        with_value: 是否计算真实价值 V

    Returns:
        PortfolioBatch: 组合轨迹
    """
    if tables is None:
        tables = build_hedge_tables(p, payoff, batch.times)
    if tables.times.shape != batch.times.shape:
        raise ParameterError("预计算表的时间网格与路径不一致")

    spot = batch.spot
    shape = batch.x.shape
    pi_plus = np.zeros(shape, dtype=complex)
    pi_minus = np.zeros(shape, dtype=complex)
    pi_imm = np.zeros(shape, dtype=complex)
    v_true = np.zeros(shape, dtype=complex) if with_value else None

    with np.errstate(over="ignore", invalid="ignore"):
        for term in tables.terms:
            plus = _term_track(term.pair.u_plus, term.s, term.plus, batch, spot)
            minus = _term_track(term.pair.u_minus, term.s, term.minus, batch, spot)
            pi_plus += term.a * plus
            pi_minus += term.a * minus
            pi_imm += term.a * (term.weights.alpha_plus * plus + term.weights.alpha_minus * minus)
            if with_value:
                v_true += term.a * term.qv.value(batch.qv, batch.y)

    return PortfolioBatch(pi_plus=pi_plus, pi_minus=pi_minus, pi_imm=pi_imm, v_true=v_true)


def evolve_portfolios(path: PathRecord, p: HestonParams, payoff: PayoffSpec,
                      tables: Optional[HedgeTables] = None) -> PortfolioTrack:
    """单条路径上的组合演化，委托给 evolve_batch"""
    batch = PathBatch.from_record(path)
    return evolve_batch(batch, p, payoff, tables, with_value=True).track(0)


def _chunk_errors(p: HestonParams, cfg: SimConfig, payoff: PayoffSpec, tables: HedgeTables,
                  ids: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    batch = simulate_batch(p, cfg, ids)
    portfolios = evolve_batch(batch, p, payoff, tables, with_value=False)
    realized = eval_payoff(payoff, batch.qv[-1])
    return (
        portfolios.pi_plus[-1] - realized,
        portfolios.pi_minus[-1] - realized,
        portfolios.pi_imm[-1] - realized,
        int(batch.negative_y_clamps.sum()),
    )


def hedge_experiment(p: HestonParams, payoff: PayoffSpec, cfg: SimConfig,
                     progress: Optional[ProgressCallback] = None,
                     cancel_check: Optional[CancelCheck] = None) -> HedgeErrors:
    """
    对冲实验：模拟全部路径并计算三种策略的终端误差

    路径按 Config.PATH_CHUNK_SIZE 固定分块，块内向量化，块间用线程池并行；
    结果按块顺序拼接，因此与线程数无关。

    Args:
        p: 模型参数
        payoff: 收益
        cfg: 模拟配置（rho_override 优先）
        progress: 每完成一个块调用 progress(已完成路径数, 总路径数)
        cancel_check: 返回 True 时中止实验

    Returns:
        HedgeErrors: 逐路径误差
    """
    p = cfg.effective_params(p)
    times = cfg.time_grid(p)
    tables = build_hedge_tables(p, payoff, times)
    chunks = _chunks(cfg.n_paths)
    workers = cfg.resolved_workers()
    logger.debug(
        f"开始对冲实验: 收益={payoff.label}, ρ={p.rho:+.2f}, 路径数={cfg.n_paths}, "
        f"步数={times.size - 1}, 线程数={workers}"
    )

    parts = []
    done = 0
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(_chunk_errors, p, cfg, payoff, tables, ids) for ids in chunks]
        try:
            for ids, future in zip(chunks, futures):
                if cancel_check is not None and cancel_check():
                    raise ExperimentCancelled(f"ρ={p.rho:+.2f} 的实验已取消")
                parts.append(future.result())
                done += ids.size
                if progress is not None:
                    progress(done, cfg.n_paths)
        except BaseException:
            for future in futures:
                future.cancel()
            raise

    eps_plus = np.concatenate([part[0] for part in parts])
    eps_minus = np.concatenate([part[1] for part in parts])
    eps_imm = np.concatenate([part[2] for part in parts])
    clamps = sum(part[3] for part in parts)

    bad = ~(np.isfinite(eps_plus) & np.isfinite(eps_minus) & np.isfinite(eps_imm))
    if np.any(bad):
        raise NumericalOverflowError(
            f"{int(bad.sum())} 条路径的组合价值出现非有限值，首条路径编号 {int(np.flatnonzero(bad)[0])}"
        )
    if clamps:
        logger.warning(f"ρ={p.rho:+.2f}: 负方差截断共 {clamps} 次")

    return HedgeErrors(eps_plus=eps_plus, eps_minus=eps_minus, eps_imm=eps_imm,
                       negative_y_clamps=clamps, rho=p.rho)


def track_frame(path: PathRecord, track: PortfolioTrack, stride: int = 1) -> pd.DataFrame:
    """
    路径与组合轨迹的导出表

    Args:
        path: 路径
        track: 组合轨迹
        stride: 抽样步长，终点总会保留

    Returns:
        pd.DataFrame: path_id, t, x, y, qv 与各轨迹的实部/虚部
    """
    if stride < 1:
        raise ParameterError(f"抽样步长必须至少为1，当前值: {stride}")
    index = np.arange(0, path.times.size, stride)
    if index[-1] != path.times.size - 1:
        index = np.append(index, path.times.size - 1)

    columns = {
        "path_id": np.full(index.size, path.path_id),
        "t": path.times[index],
        "x": path.x[index],
        "y": path.y[index],
        "qv": path.qv[index],
    }
    series = {"pi_plus": track.pi_plus, "pi_minus": track.pi_minus, "pi_imm": track.pi_imm,
              "v_true": track.v_true}
    for name, values in series.items():
        values = np.full(path.times.size, np.nan + 0j) if values is None else values
        columns[f"{name}_re"] = values[index].real
        columns[f"{name}_im"] = values[index].imag
    return pd.DataFrame(columns)

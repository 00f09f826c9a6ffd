"""
配置管理模块

该模块包含应用程序的全局配置参数，负责：
- 应用程序版本信息管理
- 对冲实验的默认模拟参数
- 并发与分块参数
- 输出、日志和数值反演的常量

主要类：
- Config: 应用程序全局配置类

作者: QVHedge 开发团队
版本: 1.0.0
"""

from typing import List, Tuple


class Config:
    """
    应用程序全局配置类

    所有配置项都集中在此类中管理。实验文档（config/default_experiment.json）
    中未给出的字段使用这里的默认值。
    """

    # 应用程序版本号
    APP_VERSION = "1.0.0"

    # 实验配置文档的结构版本
    CONFIG_SCHEMA_VERSION = 1

    # 模拟默认值（时间步长 1/1000，10000 条路径）
    DEFAULT_DT = 1.0 / 1000.0
    DEFAULT_N_PATHS = 10000
    DEFAULT_SEED = 20240531

    # --quick 模式，用于CI
    QUICK_DT = 1.0 / 250.0
    QUICK_N_PATHS = 2000

    # 每个向量化批次的路径数，与工作线程数无关，保证结果逐位一致
    PATH_CHUNK_SIZE = 250

    # 路径级并行的默认线程数，None 表示自动
    DEFAULT_PARALLEL_WORKERS = None
    MAX_PARALLEL_WORKERS = 8

    # 同时运行的相关系数实验数量
    MAX_CONCURRENT_EXPERIMENTS = 2

    # 默认相关系数网格
    DEFAULT_RHO_GRID = (-0.99, -0.66, 0.0, 0.66, 0.99)

    # ρ 扫描的网格点数（覆盖 [-1, 1]）
    SWEEP_POINTS = 81

    # 直方图默认分箱数
    HISTOGRAM_BINS = 50

    # 密度反演：特征函数尾部相对峰值的截断阈值
    DENSITY_TAIL_RATIO = 1e-8
    DENSITY_START_FREQUENCY = 64.0
    DENSITY_MAX_FREQUENCY = float(2 ** 20)

    # 收益图的二次变差区间和点数
    PAYOFF_PLOT_RANGE: Tuple[float, float] = (0.0, 0.2)
    PAYOFF_PLOT_POINTS = 401

    # density 命令的默认上限
    DENSITY_PLOT_UPPER = 1.0
    DENSITY_PLOT_POINTS = 1001

    # 路径导出的抽样步长
    DEFAULT_PATH_STRIDE = 10

    # 默认输出目录
    DEFAULT_OUTPUT_DIR = "results"

    # 日志配置
    LOG_FILE_NAME = "qvhedge.log"
    LOG_MAX_BYTES = 10 * 1024 * 1024
    LOG_BACKUP_COUNT = 5

    # 文件名最大长度限制
    MAX_FILENAME_LENGTH = 120

    @classmethod
    def validate_config(cls) -> Tuple[bool, List[str]]:
        """
        验证配置参数的有效性

        Returns:
            Tuple[bool, List[str]]: (是否有效, 错误信息列表)
        """
        errors = []

        try:
            if cls.DEFAULT_DT <= 0:
                errors.append(f"DEFAULT_DT 必须大于0，当前值: {cls.DEFAULT_DT}")
            if cls.QUICK_DT <= 0:
                errors.append(f"QUICK_DT 必须大于0，当前值: {cls.QUICK_DT}")

            if cls.DEFAULT_N_PATHS < 1:
                errors.append(f"DEFAULT_N_PATHS 必须至少为1，当前值: {cls.DEFAULT_N_PATHS}")
            if cls.QUICK_N_PATHS < 1:
                errors.append(f"QUICK_N_PATHS 必须至少为1，当前值: {cls.QUICK_N_PATHS}")

            if cls.PATH_CHUNK_SIZE < 1:
                errors.append(f"PATH_CHUNK_SIZE 必须至少为1，当前值: {cls.PATH_CHUNK_SIZE}")
            elif cls.PATH_CHUNK_SIZE > 5000:
                errors.append(f"PATH_CHUNK_SIZE 建议不超过5000，当前值: {cls.PATH_CHUNK_SIZE}")

            if cls.MAX_CONCURRENT_EXPERIMENTS <= 0:
                errors.append(
                    f"MAX_CONCURRENT_EXPERIMENTS 必须大于0，当前值: {cls.MAX_CONCURRENT_EXPERIMENTS}"
                )
            if cls.MAX_PARALLEL_WORKERS <= 0:
                errors.append(f"MAX_PARALLEL_WORKERS 必须大于0，当前值: {cls.MAX_PARALLEL_WORKERS}")

            for rho in cls.DEFAULT_RHO_GRID:
                if abs(rho) > 1:
                    errors.append(f"DEFAULT_RHO_GRID 中的相关系数必须在[-1, 1]内，当前值: {rho}")

            if cls.SWEEP_POINTS < 2:
                errors.append(f"SWEEP_POINTS 必须至少为2，当前值: {cls.SWEEP_POINTS}")
            if cls.HISTOGRAM_BINS < 1:
                errors.append(f"HISTOGRAM_BINS 必须至少为1，当前值: {cls.HISTOGRAM_BINS}")

            if not 0 < cls.DENSITY_TAIL_RATIO < 1:
                errors.append(f"DENSITY_TAIL_RATIO 必须在(0, 1)内，当前值: {cls.DENSITY_TAIL_RATIO}")
            if cls.DENSITY_MAX_FREQUENCY <= cls.DENSITY_START_FREQUENCY:
                errors.append("DENSITY_MAX_FREQUENCY 必须大于 DENSITY_START_FREQUENCY")

            low, high = cls.PAYOFF_PLOT_RANGE
            if not 0 <= low < high:
                errors.append(f"PAYOFF_PLOT_RANGE 无效: {cls.PAYOFF_PLOT_RANGE}")

            if cls.DEFAULT_PATH_STRIDE < 1:
                errors.append(f"DEFAULT_PATH_STRIDE 必须至少为1，当前值: {cls.DEFAULT_PATH_STRIDE}")

            if not cls.APP_VERSION or not isinstance(cls.APP_VERSION, str):
                errors.append("APP_VERSION 必须是有效的版本号字符串")
            elif not cls.APP_VERSION.replace('.', '').isdigit():
                errors.append(f"APP_VERSION 格式无效: {cls.APP_VERSION}")

            return len(errors) == 0, errors

        except Exception as e:
            errors.append(f"配置验证过程中发生异常: {e}")
            return False, errors

    @classmethod
    def get_config_summary(cls) -> dict:
        """
        获取配置摘要信息

        Returns:
            dict: 配置摘要
        """
        return {
            "version": cls.APP_VERSION,
            "schema_version": cls.CONFIG_SCHEMA_VERSION,
            "path_chunk_size": cls.PATH_CHUNK_SIZE,
            "max_concurrent_experiments": cls.MAX_CONCURRENT_EXPERIMENTS,
            "sweep_points": cls.SWEEP_POINTS,
            "histogram_bins": cls.HISTOGRAM_BINS,
            "density_tail_ratio": cls.DENSITY_TAIL_RATIO,
        }

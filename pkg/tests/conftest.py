"""测试共享夹具"""

import os
import sys

os.environ.setdefault("QT_QPA_PLATFORM", "offscreen")
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest  # noqa: E402

from src.core.config import Config  # noqa: E402
from src.core.heston_model import HestonParams  # noqa: E402
from src.core.mc_engine import SimConfig  # noqa: E402

# 小规模运行的容差放宽倍数
QUICK_WIDEN = 3.0


@pytest.fixture
def default_params() -> HestonParams:
    """x0=0, y0=0.04, κ=1.15, θ=0.04, δ=0.2, ρ=0, T=1"""
    return HestonParams()


@pytest.fixture
def quick_cfg() -> SimConfig:
    return SimConfig.quick(seed=Config.DEFAULT_SEED)


@pytest.fixture
def small_cfg() -> SimConfig:
    """单元测试用的小配置：250 步，500 条路径"""
    return SimConfig(dt=Config.QUICK_DT, n_paths=500, seed=12345)

"""
绘图模块

该模块从已写入的 CSV 数据文件渲染 SVG 图，负责：
- ρ 扫描图（实部/虚部两栏）
- 样本路径图
- 对冲误差直方图
- 收益与目标函数对比图（背景为二次变差密度）
- 二次变差密度图

绘图只读取数据文件，不参与任何数值计算。

作者: QVHedge 开发团队
版本: 1.0.0
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from .logger import get_logger  # noqa: E402

logger = get_logger(__name__)

# 固定哈希盐与去掉日期，使 SVG 输出可复现
matplotlib.rcParams["svg.hashsalt"] = "qvhedge"
_SVG_METADATA = {"Date": None}

_STRATEGY_STYLES = {
    "pi_plus": ("Π⁺", "tab:blue", "-"),
    "pi_minus": ("Π⁻", "tab:orange", "-"),
    "pi_imm": ("Π", "tab:green", "-"),
    "v_true": ("V", "black", "--"),
}


def _save(figure, svg_path: str) -> str:
    figure.tight_layout()
    figure.savefig(svg_path, format="svg", metadata=_SVG_METADATA)
    plt.close(figure)
    logger.info(f"已生成图像: {svg_path}")
    return svg_path


def plot_sweep(csv_path: str, svg_path: str, title: str = "") -> str:
    """Π₀⁺、Π₀⁻、Π₀ 与 V₀ 随 ρ 变化的实部和虚部"""
    data = pd.read_csv(csv_path)
    figure, (ax_re, ax_im) = plt.subplots(1, 2, figsize=(11, 4.5))
    for column, (label, color, style) in _STRATEGY_STYLES.items():
        ax_re.plot(data["rho"], data[f"{column}_re"], style, color=color, label=label)
        ax_im.plot(data["rho"], data[f"{column}_im"], style, color=color, label=label)
    ax_re.set_title("Re")
    ax_im.set_title("Im")
    for ax in (ax_re, ax_im):
        ax.set_xlabel("ρ")
        ax.grid(alpha=0.3)
    ax_re.legend()
    if title:
        figure.suptitle(title)
    return _save(figure, svg_path)


def plot_paths(csv_path: str, svg_path: str, title: str = "") -> str:
    """单条路径上的组合轨迹与真实价值（实部）"""
    data = pd.read_csv(csv_path)
    figure, ax = plt.subplots(figsize=(8, 4.5))
    for column, (label, color, style) in _STRATEGY_STYLES.items():
        ax.plot(data["t"], data[f"{column}_re"], style, color=color, label=label)
    ax.set_xlabel("t")
    ax.grid(alpha=0.3)
    ax.legend()
    if title:
        ax.set_title(title)
    return _save(figure, svg_path)


def plot_histograms(csv_path: str, svg_path: str, title: str = "") -> str:
    """共享分箱的误差直方图"""
    data = pd.read_csv(csv_path)
    figure, ax = plt.subplots(figsize=(8, 4.5))
    centers = data["bin_center"]
    width = float(centers.diff().median()) if len(centers) > 1 else 1.0
    for column in data.columns:
        if column == "bin_center":
            continue
        ax.bar(centers, data[column], width=width, alpha=0.45, label=column)
    ax.set_xlabel("ε")
    ax.set_ylabel("probability")
    ax.legend()
    if title:
        ax.set_title(title)
    return _save(figure, svg_path)


def plot_payoff(csv_path: str, svg_path: str, title: str = "") -> str:
    """目标收益与近似收益，右轴为二次变差密度"""
    data = pd.read_csv(csv_path)
    figure, ax = plt.subplots(figsize=(8, 4.5))
    density_ax = ax.twinx()
    density_ax.fill_between(data["qv"], data["density"], color="lightgray", alpha=0.6)
    density_ax.set_ylabel("density")
    ax.set_zorder(density_ax.get_zorder() + 1)
    ax.patch.set_visible(False)
    ax.plot(data["qv"], data["target"], "k--", label="h")
    ax.plot(data["qv"], data["approximation_re"], color="tab:red", label="φ")
    ax.set_xlabel("<X>_T")
    ax.legend(loc="upper right")
    if title:
        ax.set_title(title)
    return _save(figure, svg_path)


def plot_density(csv_path: str, svg_path: str, title: str = "") -> str:
    data = pd.read_csv(csv_path)
    figure, ax = plt.subplots(figsize=(8, 4.5))
    ax.plot(data["qv"], data["density"], color="tab:blue")
    ax.set_xlabel("<X>_T")
    ax.set_ylabel("density")
    ax.grid(alpha=0.3)
    if title:
        ax.set_title(title)
    return _save(figure, svg_path)

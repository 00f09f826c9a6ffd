"""
文件工具模块

该模块包含输出文件相关的工具函数，负责：
- 标签清理，生成合法的文件名
- 输出文件路径的统一命名
- CSV 与 JSON 文件的写入

主要函数：
- sanitize_label: 清理标签
- output_path: 生成 <命令>_<标签>[_rho<值>].<扩展名> 路径
- write_csv / write_json: 写入数据文件

作者: QVHedge 开发团队
版本: 1.0.0
"""

import json
import os
import re
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from ..core.config import Config
from .logger import get_logger

logger = get_logger(__name__)


def sanitize_label(label: str) -> str:
    """
    清理标签，确保可以作为文件名的一部分

    移除文件系统不允许的字符、路径分隔符和控制字符，空白替换为下划线，
    并限制长度。

    Args:
        label: 原始标签

    Returns:
        str: 清理后的标签
    """
    # 移除Windows文件系统不允许的字符
    label = re.sub(r'[<>:"/\\|?*]', "", str(label))

    # 移除控制字符
    label = re.sub(r'[\x00-\x1f\x7f-\x9f]', "", label)

    # 移除Unicode控制字符
    label = re.sub(r'[\u200b-\u200f\u2028-\u202f\u2060-\u206f]', "", label)

    label = re.sub(r"\s+", "_", label.strip()).strip("._")
    label = label[:Config.MAX_FILENAME_LENGTH]

    return label or "unnamed"


def rho_suffix(rho: float) -> str:
    """相关系数的文件名后缀，例如 -0.66 -> rho-0.66"""
    return f"rho{rho:+.2f}".replace("+", "")


def output_path(directory: str, command: str, label: str,
                extension: str, rho: Optional[float] = None) -> str:
    """
    生成输出文件路径

    Args:
        directory: 输出目录
        command: 命令名
        label: 收益标签
        extension: 扩展名（不含点）
        rho: 相关系数，None 表示不加后缀

    Returns:
        str: 文件路径
    """
    stem = f"{sanitize_label(command)}_{sanitize_label(label)}"
    if rho is not None:
        stem = f"{stem}_{rho_suffix(rho)}"
    return os.path.join(directory, f"{stem}.{extension}")


def ensure_directory(directory: str) -> str:
    os.makedirs(directory, exist_ok=True)
    return directory


def write_csv(frame: pd.DataFrame, path: str, index: bool = False) -> str:
    """按 RFC 4180 写入 CSV（CRLF 换行）"""
    ensure_directory(os.path.dirname(path) or ".")
    frame.to_csv(path, index=index, lineterminator="\r\n", float_format="%.17g")
    logger.info(f"已写入数据文件: {path}")
    return path


def _json_default(value: Any) -> Any:
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"无法序列化类型 {type(value).__name__}")


def write_json(data: Dict[str, Any], path: str) -> str:
    """写入 JSON 摘要"""
    ensure_directory(os.path.dirname(path) or ".")
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, ensure_ascii=False, indent=2, default=_json_default)
    logger.info(f"已写入摘要: {path}")
    return path

"""
工具模块

包含日志、文件输出和绘图工具。
"""

from .logger import get_logger, logger, setup_logger
from .file_utils import output_path, sanitize_label, write_csv, write_json

__all__ = [
    "get_logger",
    "logger",
    "setup_logger",
    "output_path",
    "sanitize_label",
    "write_csv",
    "write_json",
]

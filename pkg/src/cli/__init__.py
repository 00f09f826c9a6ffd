"""
命令行模块

包含参数解析和实验命令。
"""

from .app import build_parser, main, parse_args

__all__ = ["build_parser", "main", "parse_args"]

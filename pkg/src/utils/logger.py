"""
日志工具模块

该模块包含日志记录相关的工具函数，负责：
- 应用程序日志系统的初始化和配置
- 日志文件的创建和轮转
- 子模块日志记录器的获取

主要组件：
- setup_logger: 设置日志记录器
- get_logger: 获取子模块日志记录器
- logger: 全局日志记录器实例

作者: QVHedge 开发团队
版本: 1.0.0
"""

import logging
import os
from logging.handlers import RotatingFileHandler
from typing import Optional, Union

from ..core.config import Config

APP_LOGGER_NAME = "QVHedge"

_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
_DATEFMT = "%Y-%m-%d %H:%M:%S"


def setup_logger(log_dir: Optional[str] = None,
                 level: Union[int, str] = logging.INFO) -> logging.Logger:
    """
    设置日志记录器

    清除已有处理器后重新挂载控制台处理器；给出日志目录时再挂载轮转文件处理器。
    可重复调用，不会产生重复输出。

    Args:
        log_dir: 日志目录，None 表示只输出到控制台
        level: 日志级别

    Returns:
        logging.Logger: 应用程序日志记录器
    """
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.INFO

    formatter = logging.Formatter(_FORMAT, datefmt=_DATEFMT)

    app_logger = logging.getLogger(APP_LOGGER_NAME)
    app_logger.setLevel(level)
    app_logger.propagate = False  # 避免重复日志

    # 清除现有的处理器
    for handler in app_logger.handlers[:]:
        try:
            handler.close()
        finally:
            app_logger.removeHandler(handler)

    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    console_handler.set_name("console_handler")
    app_logger.addHandler(console_handler)

    if log_dir:
        log_file = os.path.join(log_dir, Config.LOG_FILE_NAME)
        try:
            os.makedirs(log_dir, exist_ok=True)
            file_handler = RotatingFileHandler(
                log_file,
                maxBytes=Config.LOG_MAX_BYTES,
                backupCount=Config.LOG_BACKUP_COUNT,
                encoding='utf-8'
            )
            file_handler.setLevel(level)
            file_handler.setFormatter(formatter)
            file_handler.set_name("file_handler")
            app_logger.addHandler(file_handler)
        except (OSError, IOError) as e:
            app_logger.warning(f"无法创建日志文件处理器，仅输出到控制台: {e}")

    return app_logger


def get_logger(name: str) -> logging.Logger:
    """
    获取子模块日志记录器

    Args:
        name: 模块名，例如 __name__

    Returns:
        logging.Logger: "QVHedge.<name>" 日志记录器
    """
    short = name.rsplit(".", 1)[-1]
    return logging.getLogger(f"{APP_LOGGER_NAME}.{short}")


# 初始化日志系统（仅控制台）
setup_logger()
logger = logging.getLogger(APP_LOGGER_NAME)

"""
工作线程模块

包含按相关系数并发运行实验的工作线程。
"""

from .experiment_worker import ExperimentRunner, ExperimentWorker

__all__ = ["ExperimentRunner", "ExperimentWorker"]

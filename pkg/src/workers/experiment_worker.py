"""
实验工作线程模块

该模块包含按相关系数并发运行实验的工作线程，负责：
- 在独立线程中运行单个 ρ 的实验任务
- 通过信号报告进度、日志、结果和错误
- 支持取消操作
- 限制同时运行的实验数量并按网格顺序收集结果

主要类：
- ExperimentWorker: 单个相关系数的实验线程
- ExperimentRunner: 实验调度器

作者: QVHedge 开发团队
版本: 1.0.0
"""

import signal
import threading
from collections import deque
from typing import Any, Callable, Deque, Dict, List, Optional, Sequence, Tuple

from PyQt5.QtCore import QCoreApplication, QEventLoop, QMutex, QObject, QThread, QTimer, pyqtSignal

from ..core.config import Config
from ..core.exceptions import ExperimentCancelled
from ..utils.logger import get_logger

logger = get_logger(__name__)

# 任务签名: task(progress(done, total), cancel_check()) -> 结果
Task = Callable[[Callable[[int, int], None], Callable[[], bool]], Any]

# 没有 Qt 应用实例时创建的实例，保持引用
_core_app: Optional[QCoreApplication] = None


class ExperimentWorker(QThread):
    """单个相关系数的实验线程"""

    progress_signal = pyqtSignal(dict)  # {"rho", "done", "total", "percent"}
    log_signal = pyqtSignal(str)
    result_signal = pyqtSignal(float, object)  # ρ, 结果
    error_signal = pyqtSignal(float, object)  # ρ, 异常

    def __init__(self, rho: float, task: Task):
        super().__init__()
        self.rho = float(rho)
        self.task = task
        self._cancelled = False
        self._mutex = QMutex()
        self._last_percent = -1

    def run(self) -> None:
        try:
            self.log_signal.emit(f"开始 ρ={self.rho:+.2f} 的实验")
            result = self.task(self._report_progress, self._check_cancelled)
            if self._check_cancelled():
                raise ExperimentCancelled(f"ρ={self.rho:+.2f} 的实验已取消")
            self.result_signal.emit(self.rho, result)
            self.log_signal.emit(f"ρ={self.rho:+.2f} 的实验完成")
        except Exception as e:
            self.error_signal.emit(self.rho, e)

    def cancel(self) -> None:
        """取消实验，任务在下一个检查点退出"""
        self._mutex.lock()
        try:
            self._cancelled = True
        finally:
            self._mutex.unlock()
        self.log_signal.emit(f"正在取消 ρ={self.rho:+.2f} 的实验...")

    def _check_cancelled(self) -> bool:
        self._mutex.lock()
        try:
            return self._cancelled
        finally:
            self._mutex.unlock()

    def _report_progress(self, done: int, total: int) -> None:
        percent = int(100 * done / total) if total else 100
        if percent == self._last_percent:
            return
        self._last_percent = percent
        self.progress_signal.emit({
            "rho": self.rho,
            "done": done,
            "total": total,
            "percent": percent,
        })


class ExperimentRunner(QObject):
    """
    实验调度器

    最多同时运行 max_concurrent 个工作线程，在本地事件循环中等待全部完成。
    结果按任务顺序返回；任一任务失败时，全部结束后抛出排在最前的异常。
    """

    progress_signal = pyqtSignal(dict)

    def __init__(self, max_concurrent: int = Config.MAX_CONCURRENT_EXPERIMENTS):
        super().__init__()
        if max_concurrent < 1:
            raise ValueError(f"max_concurrent 必须至少为1，当前值: {max_concurrent}")
        self.max_concurrent = max_concurrent
        self._pending: Deque[Tuple[int, float, Task]] = deque()
        self._active: Dict[int, ExperimentWorker] = {}
        self._finished: List[ExperimentWorker] = []
        self._results: Dict[int, Any] = {}
        self._errors: Dict[int, BaseException] = {}
        self._loop: Optional[QEventLoop] = None
        self._wake_timer: Optional[QTimer] = None

    def run(self, tasks: Sequence[Tuple[float, Task]]) -> List[Any]:
        """
        运行全部任务

        在主线程中运行时，Ctrl-C 会取消全部实验。

        Args:
            tasks: (ρ, 任务) 列表

        Returns:
            List[Any]: 与 tasks 顺序一致的结果

        Raises:
            ExperimentCancelled: 调用了 cancel() 或收到中断信号
        """
        global _core_app
        if QCoreApplication.instance() is None:
            _core_app = QCoreApplication([])

        self._pending = deque((index, float(rho), task) for index, (rho, task) in enumerate(tasks))
        self._active = {}
        self._finished = []
        self._results = {}
        self._errors = {}
        self._loop = QEventLoop()

        previous_handler = self._install_interrupt_handler()
        try:
            self._start_next()
            if self._active:
                self._loop.exec_()
        finally:
            self._restore_interrupt_handler(previous_handler)

        for worker in self._finished:
            worker.wait()

        if self._errors:
            first = min(self._errors)
            raise self._errors[first]
        if len(self._results) < len(tasks):
            raise ExperimentCancelled(f"实验已取消，完成 {len(self._results)}/{len(tasks)} 个")
        return [self._results[index] for index in range(len(tasks))]

    def cancel(self) -> None:
        """取消所有运行中和等待中的实验"""
        self._pending.clear()
        for worker in self._active.values():
            worker.cancel()

    def _install_interrupt_handler(self):
        # 信号处理器只能在主线程安装
        if threading.current_thread() is not threading.main_thread():
            return None
        previous = signal.getsignal(signal.SIGINT)
        signal.signal(signal.SIGINT, self._on_interrupt)
        # 事件循环中定期回到 Python，信号处理器才能执行
        self._wake_timer = QTimer()
        self._wake_timer.timeout.connect(lambda: None)
        self._wake_timer.start(200)
        return previous

    def _restore_interrupt_handler(self, previous) -> None:
        if self._wake_timer is not None:
            self._wake_timer.stop()
            self._wake_timer = None
        if threading.current_thread() is threading.main_thread():
            signal.signal(signal.SIGINT, previous if previous is not None else signal.default_int_handler)

    def _on_interrupt(self, signum, frame) -> None:
        logger.warning("收到中断信号，正在取消实验...")
        self.cancel()

    def _start_next(self) -> None:
        while self._pending and len(self._active) < self.max_concurrent:
            index, rho, task = self._pending.popleft()
            worker = ExperimentWorker(rho, task)
            worker.log_signal.connect(self._on_log)
            worker.progress_signal.connect(self._on_progress)
            worker.result_signal.connect(lambda _rho, result, i=index: self._results.__setitem__(i, result))
            worker.error_signal.connect(lambda _rho, error, i=index: self._on_error(i, error))
            worker.finished.connect(lambda i=index: self._on_finished(i))
            self._active[index] = worker
            worker.start()

    def _on_log(self, message: str) -> None:
        logger.info(message)

    def _on_progress(self, data: dict) -> None:
        logger.debug(f"ρ={data['rho']:+.2f}: {data['done']}/{data['total']} 条路径 ({data['percent']}%)")
        self.progress_signal.emit(data)

    def _on_error(self, index: int, error: BaseException) -> None:
        self._errors[index] = error
        if isinstance(error, ExperimentCancelled):
            logger.warning(str(error))
        else:
            logger.error(f"实验失败: {error}")

    def _on_finished(self, index: int) -> None:
        worker = self._active.pop(index, None)
        if worker is not None:
            self._finished.append(worker)
        self._start_next()
        if not self._active and not self._pending and self._loop is not None:
            self._loop.quit()

"""实验工作线程测试"""

import os
import signal
import time

import pytest
from PyQt5.QtCore import QTimer

from src.core.exceptions import ExperimentCancelled
from src.workers.experiment_worker import ExperimentRunner, ExperimentWorker


def _sleepy(value, delay=0.0):
    def task(progress, cancel_check):
        time.sleep(delay)
        progress(1, 1)
        return value
    return task


def _failing(message):
    def task(progress, cancel_check):
        raise RuntimeError(message)
    return task


class TestExperimentWorker:
    def test_result(self, qtbot):
        worker = ExperimentWorker(0.66, _sleepy("done"))
        with qtbot.waitSignal(worker.result_signal, timeout=5000) as blocker:
            worker.start()
        assert blocker.args == [0.66, "done"]
        worker.wait()

    def test_error(self, qtbot):
        worker = ExperimentWorker(-0.5, _failing("boom"))
        with qtbot.waitSignal(worker.error_signal, timeout=5000) as blocker:
            worker.start()
        rho, error = blocker.args
        assert rho == -0.5
        assert isinstance(error, RuntimeError)
        worker.wait()

    def test_cancel_before_start(self, qtbot):
        worker = ExperimentWorker(0.0, _sleepy(1))
        worker.cancel()
        with qtbot.waitSignal(worker.error_signal, timeout=5000) as blocker:
            worker.start()
        assert isinstance(blocker.args[1], ExperimentCancelled)
        worker.wait()

    def test_cancel_visible_to_task(self, qtbot):
        seen = []

        def task(progress, cancel_check):
            seen.append(cancel_check())
            return None

        worker = ExperimentWorker(0.0, task)
        worker.cancel()
        with qtbot.waitSignal(worker.finished, timeout=5000):
            worker.start()
        assert seen == [True]

    def test_progress_only_on_percent_change(self, qtbot):
        received = []

        def task(progress, cancel_check):
            for done in (1, 1, 2, 2, 4):
                progress(done, 4)
            return None

        worker = ExperimentWorker(0.99, task)
        worker.progress_signal.connect(received.append)
        with qtbot.waitSignal(worker.finished, timeout=5000):
            worker.start()
        qtbot.wait(50)
        assert [item["percent"] for item in received] == [25, 50, 100]
        assert received[-1]["rho"] == 0.99


class TestExperimentRunner:
    @pytest.mark.parametrize("concurrency", [1, 2, 3])
    def test_results_in_task_order(self, qtbot, concurrency):
        runner = ExperimentRunner(max_concurrent=concurrency)
        tasks = [(-0.5, _sleepy("a", 0.2)), (0.0, _sleepy("b")), (0.5, _sleepy("c", 0.05))]
        assert runner.run(tasks) == ["a", "b", "c"]

    def test_empty(self, qtbot):
        assert ExperimentRunner().run([]) == []

    def test_first_error_raised(self, qtbot):
        runner = ExperimentRunner(max_concurrent=2)
        tasks = [(0.0, _sleepy("ok")), (0.5, _failing("second")), (0.9, _failing("third"))]
        with pytest.raises(RuntimeError, match="second"):
            runner.run(tasks)

    def test_progress_forwarded(self, qtbot):
        runner = ExperimentRunner(max_concurrent=1)
        received = []
        runner.progress_signal.connect(received.append)
        runner.run([(0.1, _sleepy(1)), (0.2, _sleepy(2))])
        assert sorted(item["rho"] for item in received) == [0.1, 0.2]

    def test_invalid_concurrency(self):
        with pytest.raises(ValueError):
            ExperimentRunner(max_concurrent=0)


def _until_cancelled(progress, cancel_check):
    while not cancel_check():
        time.sleep(0.01)
    raise ExperimentCancelled("stopped")


class TestRunnerCancellation:
    def test_cancel_stops_active_and_pending(self, qtbot):
        runner = ExperimentRunner(max_concurrent=1)
        started = []

        def tracked(progress, cancel_check):
            started.append(True)
            return _until_cancelled(progress, cancel_check)

        QTimer.singleShot(100, runner.cancel)
        with pytest.raises(ExperimentCancelled):
            runner.run([(-0.5, tracked), (0.0, tracked), (0.5, tracked)])
        assert len(started) <= 1

    def test_interrupt_signal_cancels(self, qtbot):
        runner = ExperimentRunner(max_concurrent=2)
        QTimer.singleShot(100, lambda: os.kill(os.getpid(), signal.SIGINT))
        with pytest.raises(ExperimentCancelled):
            runner.run([(-0.5, _until_cancelled), (0.5, _until_cancelled)])
        assert signal.getsignal(signal.SIGINT) != runner._on_interrupt

    def test_completed_run_restores_handler(self, qtbot):
        before = signal.getsignal(signal.SIGINT)
        ExperimentRunner().run([(0.0, _sleepy(1))])
        assert signal.getsignal(signal.SIGINT) == before

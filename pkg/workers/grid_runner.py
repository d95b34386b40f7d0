import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Any, Callable, Dict, List, Optional, Tuple

import psutil
from PyQt6.QtCore import QEventLoop, QThread, pyqtSignal

from models.verify_report import FAIL, CaseResult

logger = logging.getLogger(__name__)

CaseTask = Callable[[Dict[str, Any]], Tuple[str, Dict[str, Any]]]


def _evaluate(task: CaseTask, case: Dict[str, Any]) -> Tuple[str, Dict[str, Any]]:
    try:
        return task(case)
    except Exception as e:
        return FAIL, {"error": f"{type(e).__name__}: {e}"}


class GridRunner(QThread):
    """Thread that evaluates grid cases, optionally across worker processes"""

    progress_update = pyqtSignal(int, int)  # completed, total
    case_completed = pyqtSignal(object)  # CaseResult
    batch_complete = pyqtSignal(list)  # List[CaseResult] in case order
    error_occurred = pyqtSignal(str)

    def __init__(
        self,
        task: CaseTask,
        cases: List[Dict[str, Any]],
        workers: int = 1,
        parent=None,
    ):
        super().__init__(parent)
        self.task = task
        self.cases = cases
        self.workers = workers
        self.should_stop = False
        self.results: List[Optional[CaseResult]] = [None] * len(cases)

    def stop(self):
        """Stop after the cases already in flight"""
        self.should_stop = True

    def _record(self, index: int, outcome: Tuple[str, Dict[str, Any]]):
        status, payload = outcome
        result = CaseResult(index, status, self.cases[index], payload)
        self.results[index] = result
        if "error" in payload:
            self.error_occurred.emit(f"Case {index}: {payload['error']}")
        self.case_completed.emit(result)

    def run(self):
        total = len(self.cases)
        completed = 0
        try:
            if self.workers > 1 and total > 1:
                with ProcessPoolExecutor(max_workers=self.workers) as pool:
                    futures = {
                        pool.submit(_evaluate, self.task, case): index
                        for index, case in enumerate(self.cases)
                    }
                    for future in as_completed(futures):
                        self._record(futures[future], future.result())
                        completed += 1
                        self.progress_update.emit(completed, total)
                        if self.should_stop:
                            for pending in futures:
                                pending.cancel()
                            break
            else:
                for index, case in enumerate(self.cases):
                    if self.should_stop:
                        break
                    self._record(index, _evaluate(self.task, case))
                    completed += 1
                    self.progress_update.emit(completed, total)
        except Exception as e:
            logger.error(f"Grid run failed: {e}")
            self.error_occurred.emit(str(e))

        rss = psutil.Process().memory_info().rss // 1024
        logger.debug(f"Grid batch of {completed}/{total} cases done, RSS {rss} KiB")
        self.batch_complete.emit([r for r in self.results if r is not None])


def run_grid(
    task: CaseTask, cases: List[Dict[str, Any]], workers: int = 1
) -> List[CaseResult]:
    """Run ``cases`` on a GridRunner and block until its batch is complete

    Needs a QCoreApplication so that the cross-thread signals are delivered.
    """
    collected: List[CaseResult] = []
    runner = GridRunner(task, cases, workers)
    loop = QEventLoop()
    runner.batch_complete.connect(collected.extend)
    runner.progress_update.connect(
        lambda done, total: logger.debug(f"Progress {done}/{total}")
    )
    runner.error_occurred.connect(lambda message: logger.warning(message))
    runner.finished.connect(loop.quit)
    runner.start()
    loop.exec()
    runner.wait()
    return collected

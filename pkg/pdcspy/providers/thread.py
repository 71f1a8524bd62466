import logging
import os
from concurrent.futures import Executor, ThreadPoolExecutor
from typing import Any, Callable, Iterable, Iterator, Optional

from pdcspy.providers.serial import SerialProvider

logger = logging.getLogger(__name__)


def default_workers() -> int:
    configured = os.environ.get("PDCSPY_THREADS")
    if configured:
        return int(configured)
    return os.cpu_count() or 1


class ThreadProvider(SerialProvider):
    """Runs independent work items on a thread pool.

    :param workers: Pool size. Defaults to the ``PDCSPY_THREADS`` environment variable, then the CPU count.
    """

    executor_class = ThreadPoolExecutor

    def __init__(self, workers: Optional[int] = None):
        super().__init__()

        if workers is None:
            self.workers = default_workers()
        elif isinstance(workers, int) and not isinstance(workers, bool):
            self.workers = workers
        else:
            raise TypeError(f"unknown worker count {workers!r}")
        if self.workers < 1:
            raise ValueError(f"worker count must be positive, got {self.workers}")

        self._executor: Optional[Executor] = None

    @property
    def executor(self) -> Executor:
        if self._executor is None:
            logger.debug("starting %s with %d workers", self.executor_class.__name__, self.workers)
            self._executor = self.executor_class(max_workers=self.workers)
        return self._executor

    def imap(self, fn: Callable, items: Iterable) -> Iterator[Any]:
        futures = [self.executor.submit(fn, item) for item in items]
        for future in futures:
            exc = future.exception()
            yield exc if exc is not None else future.result()

    def close(self):
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

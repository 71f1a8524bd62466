import logging
from typing import Any, Callable, Iterable, Iterator, List

logger = logging.getLogger(__name__)


class SerialProvider:
    """Runs work items one after another in the calling thread.

    Every provider yields results in input order. An item whose function raises yields the exception
    instance instead of a result, so one bad item never aborts the batch.
    """

    workers = 1

    def imap(self, fn: Callable, items: Iterable) -> Iterator[Any]:
        for item in items:
            try:
                yield fn(item)
            except Exception as exc:
                logger.debug("work item %r failed: %s", item, exc)
                yield exc

    def map(self, fn: Callable, items: Iterable) -> List[Any]:
        return list(self.imap(fn, items))

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        self.close()

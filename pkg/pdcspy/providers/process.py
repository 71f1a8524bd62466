from concurrent.futures import ProcessPoolExecutor

from pdcspy.providers.thread import ThreadProvider


class ProcessProvider(ThreadProvider):
    """Runs work items in worker processes; functions and items must be picklable.

    :param workers: Pool size, resolved as for :class:`~pdcspy.providers.ThreadProvider`.
    """

    executor_class = ProcessPoolExecutor

from typing import Optional

from .process import ProcessProvider
from .serial import SerialProvider
from .thread import ThreadProvider, default_workers


def provider_for(workers: Optional[int] = None, processes: bool = False) -> SerialProvider:
    """Pick a provider for ``workers``; one worker runs inline."""
    if workers is None:
        workers = default_workers()
    if workers == 1:
        return SerialProvider()
    if processes:
        return ProcessProvider(workers)
    return ThreadProvider(workers)


__all__ = ["SerialProvider", "ThreadProvider", "ProcessProvider", "provider_for"]

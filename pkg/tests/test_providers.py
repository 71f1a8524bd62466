import math

import pytest

from pdcspy.providers import ProcessProvider, SerialProvider, ThreadProvider, provider_for
from pdcspy.providers.thread import default_workers


def test_serial_yields_exceptions_in_order():
    results = SerialProvider().map(math.sqrt, [4.0, -1.0, 9.0])
    assert results[0] == 2.0
    assert isinstance(results[1], ValueError)
    assert results[2] == 3.0


def test_thread_provider_keeps_order():
    with ThreadProvider(3) as provider:
        assert provider.map(lambda x: x * x, range(20)) == [x * x for x in range(20)]
        results = provider.map(math.sqrt, [-1.0, 16.0])
    assert isinstance(results[0], ValueError)
    assert results[1] == 4.0
    assert provider._executor is None


def test_process_provider():
    with ProcessProvider(2) as provider:
        assert provider.map(abs, [-1, 2, -3]) == [1, 2, 3]


def test_default_workers(monkeypatch):
    monkeypatch.setenv("PDCSPY_THREADS", "3")
    assert default_workers() == 3
    assert ThreadProvider().workers == 3


@pytest.mark.parametrize("workers, error", [("2", TypeError), (True, TypeError), (0, ValueError)])
def test_bad_worker_count(workers, error):
    with pytest.raises(error):
        ThreadProvider(workers)


def test_provider_for(monkeypatch):
    assert type(provider_for(1)) is SerialProvider
    assert type(provider_for(2)) is ThreadProvider
    assert type(provider_for(2, processes=True)) is ProcessProvider
    monkeypatch.setenv("PDCSPY_THREADS", "1")
    assert type(provider_for()) is SerialProvider

from __future__ import annotations

import threading
import time
from functools import partial

import pytest

from varexp.errors import PreconditionError, SolverError
from varexp.pipeline import run_independent, run_independent_sync


def _square(value: int, delay: float = 0.0) -> int:
    time.sleep(delay)
    return value * value


def _fail(exc: Exception, delay: float = 0.0) -> int:
    time.sleep(delay)
    raise exc


async def test_results_keep_submission_order() -> None:
    jobs = [partial(_square, i, 0.02 * (5 - i)) for i in range(5)]
    assert await run_independent(jobs) == [0, 1, 4, 9, 16]


async def test_lowest_index_error_wins_after_all_jobs_finish() -> None:
    finished: list[int] = []

    def _record(i: int) -> int:
        time.sleep(0.05)
        finished.append(i)
        return i

    jobs = [
        partial(_record, 0),
        partial(_fail, SolverError("first"), 0.05),
        partial(_fail, PreconditionError("second")),
        partial(_record, 3),
    ]
    with pytest.raises(SolverError, match="first"):
        await run_independent(jobs)
    assert sorted(finished) == [0, 3]


async def test_worker_limit_is_respected() -> None:
    lock = threading.Lock()
    active = 0
    peak = 0

    def _job() -> None:
        nonlocal active, peak
        with lock:
            active += 1
            peak = max(peak, active)
        time.sleep(0.02)
        with lock:
            active -= 1

    await run_independent([_job] * 8, max_workers=2)
    assert peak <= 2


def test_sync_wrapper() -> None:
    assert run_independent_sync([partial(_square, 3)]) == [9]
    assert run_independent_sync([partial(_square, i) for i in range(4)]) == [0, 1, 4, 9]
    assert run_independent_sync([]) == []
    with pytest.raises(PreconditionError):
        run_independent_sync([partial(_square, 1), partial(_fail, PreconditionError("bad"))])

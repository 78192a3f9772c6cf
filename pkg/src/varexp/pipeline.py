"""Concurrent execution of independent solves.

Each job is a zero-argument callable (typically a ``functools.partial`` over
``minimize`` or ``run_fde``). Jobs share no mutable state, run in anyio worker
threads and their results come back in submission order.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from functools import partial
from typing import TypeVar, cast

import anyio
import anyio.to_thread

T = TypeVar("T")

DEFAULT_MAX_WORKERS = 4


async def run_independent(
    jobs: Sequence[Callable[[], T]],
    max_workers: int = DEFAULT_MAX_WORKERS,
) -> list[T]:
    """Run ``jobs`` concurrently and return their results in order.

    Every job runs to completion; the exception of the lowest-indexed failing
    job is then re-raised unchanged.
    """
    results: list[T | None] = [None] * len(jobs)
    errors: list[Exception | None] = [None] * len(jobs)
    limiter = anyio.CapacityLimiter(max(1, max_workers))

    async def _run(index: int, job: Callable[[], T]) -> None:
        try:
            results[index] = await anyio.to_thread.run_sync(job, limiter=limiter)
        except Exception as e:
            errors[index] = e

    async with anyio.create_task_group() as tg:
        for index, job in enumerate(jobs):
            tg.start_soon(_run, index, job)
    for error in errors:
        if error is not None:
            raise error
    return cast("list[T]", results)


def run_independent_sync(
    jobs: Sequence[Callable[[], T]],
    max_workers: int = DEFAULT_MAX_WORKERS,
) -> list[T]:
    """Blocking wrapper around :func:`run_independent`."""
    if len(jobs) <= 1:
        return [job() for job in jobs]
    return anyio.run(partial(run_independent, jobs, max_workers))

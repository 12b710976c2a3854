# -*- coding: utf-8 -*-
"""
Centralized task management for replica batches.

Every batch of replicas runs as an asyncio task whose numpy work is pushed to a worker thread.
Results are handed back in batch order, never in completion order.
"""
import asyncio
from typing import Callable, List, Sequence, Set, TypeVar

from loguru import logger

T = TypeVar("T")

# Global task registry for all running batches
_active_tasks: Set[asyncio.Task] = set()


def get_active_tasks_count() -> int:
    """Get the number of currently active batch tasks"""
    return len(_active_tasks)


async def cleanup_completed_tasks():
    """Clean up completed tasks from the active tasks set"""
    completed_tasks = [task for task in _active_tasks if task.done()]
    for task in completed_tasks:
        _active_tasks.discard(task)
        if not task.cancelled() and task.exception():
            logger.error(f"Batch task failed: {task.exception()}")


def split_batches(replicas: Sequence[int], batch_size: int) -> List[List[int]]:
    """Cut the replica list into consecutive batches of at most batch_size ids."""
    replicas = list(replicas)
    batch_size = max(1, int(batch_size))
    return [replicas[i : i + batch_size] for i in range(0, len(replicas), batch_size)]


async def _execute_batch_task(
    work: Callable[[List[int]], T], batch: List[int], semaphore: asyncio.Semaphore, label: str
) -> T:
    """Run one batch in a worker thread, holding a slot of the semaphore"""
    current_task = asyncio.current_task()
    try:
        async with semaphore:
            result = await asyncio.to_thread(work, batch)
        logger.debug(f"Completed {label} batch replicas={batch[0]}..{batch[-1]}")
        return result

    except Exception as e:
        logger.exception(f"Error in {label} batch starting at replica {batch[0]}: {e}")
        raise

    finally:
        if current_task:
            _active_tasks.discard(current_task)


async def run_batches(
    work: Callable[[List[int]], T],
    batches: List[List[int]],
    threads: int,
    label: str = "simulation",
) -> List[T]:
    """
    Run `work` on every batch concurrently with at most `threads` batches in flight.

    Args:
        work: Pure function of a batch of replica ids
        batches: Batches as produced by split_batches
        threads: Number of worker threads
        label: Name used in log lines

    Returns:
        One result per batch, in the order of `batches`
    """
    await cleanup_completed_tasks()

    semaphore = asyncio.Semaphore(max(1, int(threads)))
    tasks = []
    for batch in batches:
        task = asyncio.create_task(_execute_batch_task(work, batch, semaphore, label))
        _active_tasks.add(task)
        tasks.append(task)

    logger.info(
        f"Started {len(tasks)} {label} batches on {threads} threads (Active tasks: {len(_active_tasks)})"
    )

    try:
        return list(await asyncio.gather(*tasks))
    except BaseException:
        for task in tasks:
            if not task.done():
                task.cancel()
        raise


async def _run_then_drain(
    work: Callable[[List[int]], T],
    batches: List[List[int]],
    threads: int,
    label: str,
    drain_timeout: float,
) -> List[T]:
    try:
        return await run_batches(work, batches, threads, label)
    finally:
        # siblings of a failed batch may still be running
        active_count = get_active_tasks_count()
        if active_count > 0:
            logger.info(f"Waiting for {active_count} {label} batches to wind down...")
        if not await wait_for_all_tasks(timeout=drain_timeout):
            logger.warning("Some batches did not finish in time, cancelling remaining tasks...")
            cancel_all_tasks()


def run_batches_sync(
    work: Callable[[List[int]], T],
    batches: List[List[int]],
    threads: int,
    label: str = "simulation",
    drain_timeout: float = 30.0,
) -> List[T]:
    """Blocking entry point for callers outside an event loop."""
    if threads <= 1 or len(batches) <= 1:
        return [work(batch) for batch in batches]
    return asyncio.run(_run_then_drain(work, batches, threads, label, drain_timeout))


async def wait_for_all_tasks(timeout: float = 30.0) -> bool:
    """
    Wait for all active tasks to complete, with timeout.

    Returns:
        True if all tasks completed, False if timeout occurred
    """
    if not _active_tasks:
        return True

    logger.info(f"Waiting for {len(_active_tasks)} active tasks to complete...")

    try:
        await asyncio.wait_for(
            asyncio.gather(*_active_tasks, return_exceptions=True), timeout=timeout
        )
        logger.info("All tasks completed successfully")
        return True

    except asyncio.TimeoutError:
        logger.warning(
            f"Timeout waiting for tasks to complete, {len(_active_tasks)} tasks still running"
        )
        return False


def cancel_all_tasks():
    """Cancel all active tasks. Use with caution."""
    if not _active_tasks:
        return

    logger.warning(f"Cancelling {len(_active_tasks)} active tasks...")

    for task in _active_tasks.copy():
        if not task.done():
            task.cancel()

    _active_tasks.clear()
    logger.info("All tasks cancelled")

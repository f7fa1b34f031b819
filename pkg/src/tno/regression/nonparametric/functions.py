"""
This module contains helper functions.
"""

from __future__ import annotations

import asyncio
import functools
import logging
import signal
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, TypeVar

ItemT = TypeVar("ItemT")
ResultT = TypeVar("ResultT")

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def handle_sigterm(*_args: Any) -> None:
    r"""
    Sigterm handler: raise KeyboardInterrupt.

    :param \*_args: unused arguments, accept any arguments
    :raise KeyboardInterrupt: raises a keyboard interrupt
    """
    raise KeyboardInterrupt()


def init(name: str, logger_level: int = logging.INFO) -> logging.Logger:
    """
    Initialize logger and sigterm handler.

    :param name: name of the logger
    :param logger_level: the logging level to use
    :return: a logger instance
    """
    try:
        signal.signal(signal.SIGTERM, handle_sigterm)
    except ValueError:
        # signal handlers can only be installed from the main thread
        pass

    logger = logging.getLogger(name)
    logging.basicConfig(format=LOG_FORMAT)
    logger.setLevel(logger_level)
    return logger


async def amap_in_executor(
    function: Callable[[ItemT], ResultT],
    items: Iterable[ItemT],
    workers: int = 1,
) -> list[ResultT]:
    """
    Evaluate a function for every item in a thread pool and gather the results.

    The results are returned in the order of the items, irrespective of the order in which the
    evaluations finish.

    :param function: function to evaluate
    :param items: arguments, one per evaluation
    :param workers: number of worker threads
    :return: the results in input order
    """
    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=max(workers, 1)) as executor:
        return list(
            await asyncio.gather(
                *(
                    loop.run_in_executor(executor, functools.partial(function, item))
                    for item in items
                )
            )
        )


def map_in_executor(
    function: Callable[[ItemT], ResultT],
    items: Iterable[ItemT],
    workers: int = 1,
) -> list[ResultT]:
    """
    Synchronous front of amap_in_executor. A single worker evaluates sequentially in the
    calling thread.

    :param function: function to evaluate
    :param items: arguments, one per evaluation
    :param workers: number of worker threads
    :return: the results in input order
    """
    if workers <= 1:
        return [function(item) for item in items]
    return asyncio.run(amap_in_executor(function, items, workers=workers))

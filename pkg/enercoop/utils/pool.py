from __future__ import annotations

import typing
from concurrent.futures import ProcessPoolExecutor

from enercoop.utils.logger import LOGGER

T = typing.TypeVar("T")
R = typing.TypeVar("R")


def ordered_map(func: typing.Callable[[T], R], items: typing.Iterable[T], workers: int = 1) -> list[R]:
    """
    Apply `func` to every item, in a pool of worker processes when `workers > 1`.

    Results come back in the order of `items`, whatever the order in which the workers finish. `func` and the items must be
    picklable when a pool is used.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    LOGGER.debug("dispatching %d tasks to %d workers", len(items), workers)
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(func, items))

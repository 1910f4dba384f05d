from __future__ import annotations

import threading
import time
import typing
from collections import defaultdict
from contextlib import contextmanager
from functools import wraps


class Timer:
    """A thread-safe accumulator of wall-clock time per named code block"""

    def __init__(self: typing.Self) -> None:
        self.__lock = threading.Lock()
        self.__elapsed: dict[str, int] = defaultdict(int)
        self.__calls: dict[str, int] = defaultdict(int)

    def record(self: typing.Self, name: str, nanoseconds: int) -> None:
        """Add a measured period to the block named 'name'"""
        with self.__lock:
            self.__elapsed[name] += nanoseconds
            self.__calls[name] += 1

    def elapsed(self: typing.Self, name: str = "default") -> float:
        """Returns the accumulated seconds for the block with the given name"""
        with self.__lock:
            return self.__elapsed[name] / 1e9

    def calls(self: typing.Self, name: str = "default") -> int:
        """Returns how many times the block with the given name has been measured"""
        with self.__lock:
            return self.__calls[name]

    def reset(self: typing.Self, name: str | None = None) -> None:
        """Forget every measurement, or only the ones for the given block"""
        with self.__lock:
            if name is None:
                self.__elapsed.clear()
                self.__calls.clear()
            else:
                self.__elapsed.pop(name, None)
                self.__calls.pop(name, None)

    @contextmanager
    def profile(self: typing.Self, name: str = "default") -> typing.Generator[Timer, None, None]:
        """Profiles a block of code using a context provider"""
        start = time.perf_counter_ns()
        try:
            yield self
        finally:
            self.record(name, time.perf_counter_ns() - start)

    def __str__(self: typing.Self) -> str:
        with self.__lock:
            names = sorted(self.__elapsed, key=lambda key: self.__elapsed[key], reverse=True)
            return "\n".join(f"{name}(): {self.__elapsed[name] / 1e9:.6f}s over {self.__calls[name]} calls" for name in names)


DEFAULT_TIMER = Timer()


def profile(name: str | None = None, *, timer: Timer = DEFAULT_TIMER) -> typing.Callable:
    """Profiles a method or function using a decorator"""
    def decorator(func: typing.Callable) -> typing.Callable:
        @wraps(func)
        def _wrapper(*args: typing.Any, **kwargs: typing.Any) -> typing.Any:
            with timer.profile(name if name is not None else func.__qualname__):
                return func(*args, **kwargs)
        return _wrapper

    return decorator

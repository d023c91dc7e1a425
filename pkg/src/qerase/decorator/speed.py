import functools
import logging
import time
from typing import Any, Callable, Optional

logger = logging.getLogger("qerase")


def speed(
    func: Optional[Callable] = None,
    *,
    warn_threshold_ms: Optional[float] = None,
    error_threshold_ms: Optional[float] = None,
) -> Callable:
    """
    Log the wall-clock time of an operation in milliseconds.

    Usable bare or configured:
        @speed
        @speed(warn_threshold_ms=500)

    Timings are logged at DEBUG, or at WARNING/ERROR once a threshold is
    exceeded. Failed calls are timed too.
    """

    def classify(elapsed_ms: float) -> tuple[int, str]:
        if error_threshold_ms is not None and elapsed_ms > error_threshold_ms:
            return logging.ERROR, f" (over error threshold {error_threshold_ms}ms)"
        if warn_threshold_ms is not None and elapsed_ms > warn_threshold_ms:
            return logging.WARNING, f" (over warn threshold {warn_threshold_ms}ms)"
        return logging.DEBUG, ""

    def decorate(fn: Callable) -> Callable:
        name = fn.__qualname__

        @functools.wraps(fn)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            started = time.perf_counter()
            try:
                return fn(*args, **kwargs)
            finally:
                elapsed_ms = (time.perf_counter() - started) * 1000.0
                level, note = classify(elapsed_ms)
                if logger.isEnabledFor(level):
                    logger.log(level, f"[SPEED] {name} | {elapsed_ms:.2f}ms{note}")

        return wrapper

    return decorate(func) if func is not None else decorate

import functools
import logging
from typing import Any, Callable, Optional

from .utils import truncate

logger = logging.getLogger("qerase")


def _resolve_level(level: str) -> int:
    resolved = logging.getLevelName(level.upper())
    return resolved if isinstance(resolved, int) else logging.DEBUG


def _call_text(args: tuple, kwargs: dict, max_length: int) -> str:
    text = f"args={truncate(args, max_length)}"
    if kwargs:
        text += f" kwargs={truncate(kwargs, max_length)}"
    return text


def log(
    func: Optional[Callable] = None,
    *,
    level: str = "debug",
    include_args: bool = True,
    include_result: bool = True,
    max_length: int = 200,
    message: Optional[str] = None,
) -> Callable:
    """
    Log calls, results and failures of a numerical operation on the ``qerase`` logger.

    Usable bare or configured:
        @log
        @log(level="info", include_args=False)

    Args:
        level: "debug", "info", "warning" or "error". Default: "debug"
        include_args: Log the arguments. Default: True
        include_result: Log the return value. Default: True
        max_length: Truncation length for logged values. Default: 200
        message: Tag prepended to every line, e.g. "DISCORD". Default: None

    Matrices and states are logged by shape and labels, never by content.
    Failures are always logged at ERROR and re-raised.
    """

    def decorate(fn: Callable) -> Callable:
        log_level = _resolve_level(level)
        tag = f"[{message}] " if message else ""
        name = fn.__qualname__

        @functools.wraps(fn)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            active = logger.isEnabledFor(log_level)
            if active:
                suffix = f" | {_call_text(args, kwargs, max_length)}" if include_args else ""
                logger.log(log_level, f"{tag}[CALL] {name}{suffix}")
            try:
                result = fn(*args, **kwargs)
            except Exception as exc:
                logger.error(f"{tag}[ERROR] {name} | exception={type(exc).__name__}: {exc}")
                raise
            if active and include_result:
                logger.log(log_level, f"{tag}[RETURN] {name} | result={truncate(result, max_length)}")
            return result

        return wrapper

    return decorate(func) if func is not None else decorate

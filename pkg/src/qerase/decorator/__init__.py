"""Observability decorators for library operations; both log to ``logging.getLogger("qerase")``."""

from .log import log
from .speed import speed

__all__ = ["log", "speed"]

from typing import Any

import numpy as np


def describe(value: Any) -> str:
    """Short text for a value; arrays and states are reduced to their shape."""
    if isinstance(value, np.ndarray):
        return f"ndarray{value.shape}"
    if hasattr(value, "matrix") and hasattr(value, "dims"):
        return f"{type(value).__name__}(dims={value.dims.dims}, labels={value.dims.labels})"
    if isinstance(value, (list, tuple)):
        inner = ", ".join(describe(v) for v in value)
        return f"({inner})" if isinstance(value, tuple) else f"[{inner}]"
    if isinstance(value, dict):
        return "{" + ", ".join(f"{k}={describe(v)}" for k, v in value.items()) + "}"
    return str(value)


def truncate(value: Any, max_length: int = 200) -> str:
    """Truncate a value's string representation for logging."""
    str_value = describe(value)
    if len(str_value) > max_length:
        return str_value[:max_length] + "..."
    return str_value

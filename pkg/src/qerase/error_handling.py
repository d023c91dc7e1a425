"""Exception hierarchy and error envelope handling for qerase."""

from __future__ import annotations

import json
from datetime import datetime, timezone
from typing import Any
from uuid import uuid4


class QEraseError(Exception):
    """Base class for every error qerase raises on purpose."""

    code = "internal_error"
    exit_code = 1

    def __init__(self, message: str, details: list[dict[str, Any]] | None = None) -> None:
        super().__init__(message)
        self.message = message
        self.details = details or []


class StateFileError(QEraseError):
    code = "parse_error"
    exit_code = 2


class InvalidStateError(QEraseError, ValueError):
    code = "invalid_state"
    exit_code = 2


class UnsupportedDimensionError(QEraseError):
    code = "unsupported_dimension"
    exit_code = 3


class InvalidParameterError(QEraseError, ValueError):
    code = "invalid_parameters"
    exit_code = 4


class DimensionMismatchError(QEraseError, ValueError):
    code = "dimension_mismatch"
    exit_code = 4


class BoundViolationError(QEraseError):
    code = "bound_violation"
    exit_code = 5


def utc_timestamp() -> str:
    """Current UTC time, ISO 8601 with a Z suffix."""
    return datetime.now(timezone.utc).isoformat().replace("+00:00", "Z")


def normalize_run_id(value: str | None) -> str:
    """Trimmed caller run id, or a fresh ``run_<hex>`` id."""
    if value:
        candidate = value.strip()
        if candidate:
            return candidate[:128]
    return f"run_{uuid4().hex}"


def build_error_envelope(
    run_id: str,
    code: str,
    message: str,
    details: list[dict[str, Any]] | None = None,
) -> dict[str, Any]:
    """Envelope printed on stderr when a command fails."""
    payload: dict[str, Any] = {
        "error": {
            "code": code,
            "message": message,
        },
        "run_id": run_id,
        "timestamp": utc_timestamp(),
    }
    if details:
        payload["error"]["details"] = details
    return payload


FILE_SECTIONS = frozenset({"dims", "labels", "matrix", "kraus"})


def _locate(location: tuple[Any, ...]) -> tuple[str, str]:
    """(dotted field path, top-level file section) for a pydantic error location."""
    if not location:
        return "unknown", "unknown"
    section = str(location[0])
    return ".".join(str(part) for part in location), section if section in FILE_SECTIONS else "unknown"


def details_from_validation_errors(errors: list[dict[str, Any]]) -> list[dict[str, Any]]:
    """Convert pydantic ``ValidationError.errors()`` items into envelope details."""
    details: list[dict[str, Any]] = []
    for item in errors:
        field, source = _locate(tuple(item.get("loc", ())))
        value = item.get("input")
        if isinstance(value, (list, dict)):
            # Whole matrices are useless in a diagnostic line
            value = f"<{type(value).__name__} of {len(value)}>"
        details.append(
            {
                "field": field,
                "source": source,
                "issue": item.get("msg", "Invalid value"),
                "value": value,
            }
        )
    return details


def details_from_json_error(exc: json.JSONDecodeError) -> list[dict[str, Any]]:
    return [
        {
            "field": f"line {exc.lineno}, column {exc.colno}",
            "source": "json",
            "issue": exc.msg,
            "value": None,
        }
    ]


def envelope_for_exception(exc: BaseException, run_id: str | None = None) -> tuple[int, dict[str, Any]]:
    """Map any exception onto (exit_code, envelope)."""
    rid = normalize_run_id(run_id)
    if isinstance(exc, QEraseError):
        return exc.exit_code, build_error_envelope(rid, exc.code, exc.message, exc.details or None)
    return 1, build_error_envelope(rid, "internal_error", f"{type(exc).__name__}: {exc}")

"""File formats: state and channel JSON files and scenario report records.

Complex entries are two-element ``[re, im]`` arrays; matrices are row-major
nested arrays of them.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Union

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, FiniteFloat, ValidationError, model_validator

from .channels import KrausChannel
from .error_handling import (
    InvalidStateError,
    QEraseError,
    StateFileError,
    details_from_json_error,
    details_from_validation_errors,
)
from .qmath import DEFAULT_TOL, DensityOperator, SubsystemDims

ComplexPair = tuple[FiniteFloat, FiniteFloat]
MatrixRows = list[list[ComplexPair]]


def encode_matrix(matrix: npt.ArrayLike) -> list[list[list[float]]]:
    matrix = np.asarray(matrix, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in matrix]


def decode_matrix(rows: MatrixRows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=np.complex128)


def _check_square(rows: MatrixRows, name: str) -> int:
    size = len(rows)
    for i, row in enumerate(rows):
        if len(row) != size:
            raise ValueError(f"{name} row {i} has {len(row)} entries, expected {size}")
    return size


class StateFile(BaseModel):
    """On-disk density operator."""

    model_config = ConfigDict(extra="forbid")

    dims: list[int] = Field(min_length=1)
    labels: list[str] = Field(min_length=1)
    matrix: MatrixRows

    @model_validator(mode="after")
    def _check_shape(self) -> "StateFile":
        if len(self.dims) != len(self.labels):
            raise ValueError(f"{len(self.dims)} dims given for {len(self.labels)} labels")
        if any(d < 1 for d in self.dims):
            raise ValueError("dims must be positive")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("labels must be unique")
        size = _check_square(self.matrix, "matrix")
        if size != int(np.prod(self.dims)):
            raise ValueError(f"matrix is {size}x{size} but dims multiply to {int(np.prod(self.dims))}")
        return self

    @classmethod
    def from_density(cls, state: DensityOperator) -> "StateFile":
        return cls(dims=list(state.dims.dims), labels=list(state.labels), matrix=encode_matrix(state.matrix))

    def to_density(self, tol: float = DEFAULT_TOL) -> DensityOperator:
        return DensityOperator(decode_matrix(self.matrix), SubsystemDims(tuple(self.dims), tuple(self.labels)), tol)


class ChannelFile(BaseModel):
    """On-disk Kraus family."""

    model_config = ConfigDict(extra="forbid")

    kraus: list[MatrixRows] = Field(min_length=1)

    @classmethod
    def from_channel(cls, channel: KrausChannel) -> "ChannelFile":
        return cls(kraus=[encode_matrix(k) for k in channel.kraus_ops])

    def to_channel(self) -> KrausChannel:
        return KrausChannel(tuple(decode_matrix(k) for k in self.kraus))


class CheckRecord(BaseModel):
    name: str
    lhs: FiniteFloat
    rhs: FiniteFloat
    tolerance: FiniteFloat
    satisfied: bool
    margin: FiniteFloat
    applicable: bool = True
    holds: bool
    # False for diagnostics that never count as a violation
    counted: bool = True
    side_conditions: dict[str, bool] = Field(default_factory=dict)
    details: dict[str, Union[FiniteFloat, str]] = Field(default_factory=dict)


class ReportRecord(BaseModel):
    """Everything one scenario run reports; numbers are finite and carry units."""

    scenario: str
    inputs_digest: str
    tool_version: str
    seed: int
    units: dict[str, str] = Field(
        default_factory=lambda: {
            "entropy": "bits",
            "work": "J",
            "heat": "bits (heat_bits) and J (heat_joules)",
            "bath_energy": "units of the bath Hamiltonian",
            "temperature": "K",
            "energy_convention": "W = k*T*ln2*dS",
        }
    )
    parameters: dict[str, Any] = Field(default_factory=dict)
    optimizer: dict[str, Any] = Field(default_factory=dict)
    ledger: dict[str, FiniteFloat]
    work: dict[str, FiniteFloat] = Field(default_factory=dict)
    checks: list[CheckRecord]
    all_checks_hold: bool
    generated_at: str


def inputs_digest(state: DensityOperator, parameters: dict[str, Any]) -> str:
    """sha256 over the state's matrix bytes, signature and the scenario parameters."""
    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(state.matrix).tobytes())
    digest.update(json.dumps({"dims": state.dims.dims, "labels": state.labels}, sort_keys=True).encode("utf-8"))
    digest.update(json.dumps(parameters, sort_keys=True, default=str).encode("utf-8"))
    return digest.hexdigest()


def read_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise StateFileError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFileError(f"{path} is not valid JSON", details_from_json_error(exc)) from exc


def parse_state(data: Any, source: str = "<state>") -> DensityOperator:
    try:
        state_file = StateFile.model_validate(data)
    except ValidationError as exc:
        raise StateFileError(f"{source} is not a valid state file", details_from_validation_errors(exc.errors())) from exc
    try:
        return state_file.to_density()
    except InvalidStateError as exc:
        raise StateFileError(
            f"{source} does not hold a valid density operator: {exc.message}",
            [{"field": "matrix", "source": "matrix", "issue": exc.message, "value": None}],
        ) from exc
    except QEraseError as exc:
        raise StateFileError(f"{source}: {exc.message}") from exc


def load_state(path: str | Path) -> DensityOperator:
    return parse_state(read_json(path), str(path))


def dump_state(state: DensityOperator) -> str:
    return StateFile.from_density(state).model_dump_json(indent=2)


def write_state(path: str | Path, state: DensityOperator) -> None:
    Path(path).write_text(dump_state(state) + "\n", encoding="utf-8")


def load_channel(path: str | Path) -> KrausChannel:
    data = read_json(path)
    try:
        channel_file = ChannelFile.model_validate(data)
    except ValidationError as exc:
        raise StateFileError(f"{path} is not a valid channel file", details_from_validation_errors(exc.errors())) from exc
    try:
        return channel_file.to_channel()
    except QEraseError as exc:
        raise StateFileError(f"{path} does not hold a valid channel: {exc.message}") from exc


def dump_channel(channel: KrausChannel) -> str:
    return ChannelFile.from_channel(channel).model_dump_json(indent=2)

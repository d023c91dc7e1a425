"""Two-qubit states shipped with the package."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from ..error_handling import InvalidParameterError
from ..formats import load_state
from ..qmath import DensityOperator

FIXTURES = ("bell", "product", "quantum_classical", "werner_0.25", "werner_0.5", "werner_0.75")


def fixture_path(name: str) -> Path:
    if name not in FIXTURES:
        raise InvalidParameterError(f"unknown fixture {name!r}; available fixtures are {list(FIXTURES)}")
    return Path(str(resources.files(__name__).joinpath(f"{name}.json")))


def load_fixture(name: str) -> DensityOperator:
    return load_state(fixture_path(name))

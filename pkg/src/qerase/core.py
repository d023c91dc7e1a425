"""Core - configurable engine with class-based scenario registration."""

from __future__ import annotations

import dataclasses
import logging
from typing import Any, List, Optional, Type

from . import __version__
from .correlations import CorrelationReport, OptimizerConfig, discord
from .channels import KrausChannel
from .ensembles import EnsembleConfig, LedgerHook, MonteCarloSummary, monte_carlo_verify
from .error_handling import BoundViolationError, InvalidParameterError
from .formats import ReportRecord
from .ledger import PhysicalConstants
from .qmath import DensityOperator
from .scenario import BUILTIN_SCENARIOS, Scenario, ScenarioResult, build_report

logger = logging.getLogger("qerase")

OPTIMIZER_KEYS = {"grid_resolution", "refinement_iterations", "random_restarts", "seed", "convergence_tol"}
CONSTANT_KEYS = {"temperature": "temperature", "boltzmann_k": "boltzmann_k"}


class Core:
    """
    Engine holding optimizer and physical settings plus the scenario registry.

    Usage:
        core = Core()
        core.tinker(grid_resolution=32, temperature=77.0)
        result = core.run("bleach", state, dist=[0.5, 0.5])
    """

    def __init__(self, *, builtins: bool = True):
        self.optimizer = OptimizerConfig()
        self.constants = PhysicalConstants()
        self.strict_bounds: bool = False
        self._scenarios: dict[str, Type[Scenario]] = {}
        if builtins:
            for scenario_class in BUILTIN_SCENARIOS:
                self.register(scenario_class)

    def register(self, scenario_class: Type[Scenario]) -> "Core":
        """
        Register a Scenario subclass under its name.

        Args:
            scenario_class: A class that inherits from Scenario

        Returns:
            Self for method chaining
        """
        if not isinstance(scenario_class, type) or not issubclass(scenario_class, Scenario):
            raise TypeError(f"{scenario_class} must be a subclass of Scenario")

        if scenario_class is Scenario:
            raise ValueError("Cannot register the base Scenario class directly")

        name = scenario_class.get_name()
        existing = self._scenarios.get(name)
        if existing is not None and existing is not scenario_class:
            raise InvalidParameterError(f"scenario name {name!r} is already taken by {existing.__name__}")
        self._scenarios[name] = scenario_class
        logger.debug(f"[SCENARIO] registered {name} -> {scenario_class.__name__}")
        return self

    def tinker(self, **kwargs: Any) -> "Core":
        """
        Configure the engine.

        Args:
            **kwargs: Configuration options.
                - grid_resolution, refinement_iterations, random_restarts, seed,
                  convergence_tol: measurement optimizer settings.
                - temperature (K), boltzmann_k (J/K): constants for work conversion.
                - strict_bounds: raise BoundViolationError when a scenario check fails (default: False).

        Returns:
            Self for method chaining
        """
        unknown = set(kwargs) - OPTIMIZER_KEYS - set(CONSTANT_KEYS) - {"strict_bounds"}
        if unknown:
            raise InvalidParameterError(f"unknown configuration keys {sorted(unknown)}")

        if "strict_bounds" in kwargs:
            self.strict_bounds = bool(kwargs.pop("strict_bounds"))

        optimizer = {k: v for k, v in kwargs.items() if k in OPTIMIZER_KEYS}
        if optimizer:
            self.optimizer = dataclasses.replace(self.optimizer, **optimizer)

        constants = {CONSTANT_KEYS[k]: v for k, v in kwargs.items() if k in CONSTANT_KEYS}
        if constants:
            self.constants = dataclasses.replace(self.constants, **constants)

        return self

    def get_scenario(self, name: str) -> Type[Scenario]:
        try:
            return self._scenarios[name]
        except KeyError:
            raise InvalidParameterError(
                f"unknown scenario {name!r}; registered scenarios are {sorted(self._scenarios)}"
            ) from None

    def run(self, name: str, state: DensityOperator, **params: Any) -> ScenarioResult:
        """Run a registered scenario on ``state`` with raw parameter values."""
        scenario_class = self.get_scenario(name)
        parsed = scenario_class.parse_params(params)
        result = scenario_class().run(state, parsed, self.optimizer, self.constants)
        if self.strict_bounds and not result.all_checks_hold:
            raise BoundViolationError(
                f"scenario {name!r} violated {list(result.violations)}",
                [{"field": c.name, "source": "checks", "issue": f"margin {c.margin:.3e}", "value": c.lhs}
                 for c in result.checks if not c.holds],
            )
        return result

    def report(self, result: ScenarioResult, state: DensityOperator) -> ReportRecord:
        return build_report(
            result,
            state,
            seed=self.optimizer.seed,
            tool_version=__version__,
            optimizer=self.optimizer,
            consts=self.constants,
        )

    def discord(self, state: DensityOperator, side: str = "B") -> CorrelationReport:
        return discord(state, side, self.optimizer)

    def montecarlo(
        self,
        cfg: EnsembleConfig,
        *,
        channel: Optional[KrausChannel] = None,
        ledger_hook: Optional[LedgerHook] = None,
    ) -> MonteCarloSummary:
        return monte_carlo_verify(cfg, self.optimizer, channel=channel, ledger_hook=ledger_hook)

    def get_registered_scenarios(self) -> List[Type[Scenario]]:
        """Get a list of all registered Scenario classes."""
        return list(self._scenarios.values())

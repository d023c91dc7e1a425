"""Scenario base class for defining named erasure processes."""

from __future__ import annotations

import inspect
import logging
import re
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple, Type, get_type_hints

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, FiniteFloat, ValidationError

from .channels import (
    ProcessOutcome,
    UnitaryDilation,
    bleaching_dilation,
    dephasing_measurement_channel,
    fixed_output_spread,
    purified_environment,
    run_process,
    stinespring_dilation,
    swap_dilation,
    thermal_state,
    thermalizing_dilation,
)
from .correlations import MEASUREMENT_CLASS, OptimizerConfig
from .error_handling import InvalidParameterError, details_from_validation_errors, utc_timestamp
from .formats import CheckRecord, ChannelFile, MatrixRows, ReportRecord, decode_matrix, inputs_digest
from .ledger import (
    BoundCheckResult,
    EntropyLedger,
    ErasureWork,
    PhysicalConstants,
    build_ledger,
    check_asymmetric_erasure_bound,
    check_classical_monotonicity,
    check_landauer_uncorrelated,
    erasure_work,
    evaluate_bounds,
)
from .ensembles import random_density_matrix, trial_rng
from .qmath import DensityOperator, SubsystemDims, partial_trace, trace_distance

logger = logging.getLogger("qerase")

# Outputs of a fixed-output channel must agree to this trace distance
FIXED_OUTPUT_TOL = 1e-10
FIXED_OUTPUT_SAMPLES = 5


class ScenarioMeta(type):
    """Metaclass that records the parameter model each scenario declares."""

    def __new__(mcs, name: str, bases: Tuple[type, ...], namespace: Dict[str, Any]) -> type:
        cls = super().__new__(mcs, name, bases, namespace)

        # Skip processing for the base Scenario class itself
        if name == "Scenario" and not bases:
            return cls

        build = namespace.get("build")
        if build is not None:
            cls._params_model = mcs._extract_params_model(build) or NoParams
        return cls

    @staticmethod
    def _extract_params_model(method) -> Optional[Type[BaseModel]]:
        """Type hint of the ``params`` argument of ``build``, when it is a pydantic model."""
        try:
            hints = get_type_hints(method)
            sig = inspect.signature(method)
        except (NameError, TypeError, ValueError):
            return None
        if "params" not in sig.parameters:
            return None
        model = hints.get("params")
        if isinstance(model, type) and issubclass(model, BaseModel):
            return model
        return None


class NoParams(BaseModel):
    model_config = ConfigDict(extra="forbid")


@dataclass(frozen=True, eq=False)
class ScenarioResult:
    name: str
    params: BaseModel
    outcome: ProcessOutcome
    ledger: EntropyLedger
    checks: tuple[BoundCheckResult, ...]
    diagnostics: tuple[BoundCheckResult, ...]
    work: ErasureWork

    @property
    def all_checks_hold(self) -> bool:
        return all(c.holds for c in self.checks)

    @property
    def violations(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.checks if not c.holds)


class Scenario(metaclass=ScenarioMeta):
    """Base class for a named process acting on the second subsystem of an AB state.

    Subclasses implement ``build(self, state, params: SomeModel)`` returning the
    dilation to run; the type hint of ``params`` declares the parameter model.
    Optionally set ``name`` to override the name derived from the class name.
    """

    # Override this to set a custom name instead of deriving from class name
    name: Optional[str] = None

    # Set by metaclass from the type hint of build(..., params)
    _params_model: Type[BaseModel] = NoParams

    # Physical constants of the current run, set by run()
    constants: PhysicalConstants = PhysicalConstants()

    @classmethod
    def get_name(cls) -> str:
        if cls.name is not None:
            return cls.name
        # ThermalRandomization -> thermal-randomization
        return re.sub(r"(?<!^)(?=[A-Z])", "-", cls.__name__).lower()

    @classmethod
    def get_params_model(cls) -> Type[BaseModel]:
        return cls._params_model

    @classmethod
    def parse_params(cls, raw: Optional[Dict[str, Any]] = None) -> BaseModel:
        raw = {k: v for k, v in (raw or {}).items() if v is not None}
        try:
            return cls._params_model.model_validate(raw)
        except ValidationError as exc:
            raise InvalidParameterError(
                f"invalid parameters for scenario {cls.get_name()!r}", details_from_validation_errors(exc.errors())
            ) from exc

    @staticmethod
    def acted_label(state: DensityOperator) -> str:
        if len(state.labels) != 2:
            raise InvalidParameterError(f"scenarios need a bipartite state, got subsystems {list(state.labels)}")
        return state.labels[1]

    def build(self, state: DensityOperator, params: BaseModel) -> UnitaryDilation:
        raise NotImplementedError

    def extra_checks(
        self,
        state: DensityOperator,
        dilation: UnitaryDilation,
        outcome: ProcessOutcome,
        ledger: EntropyLedger,
        params: BaseModel,
        cfg: OptimizerConfig,
    ) -> list[BoundCheckResult]:
        return []

    def run(
        self,
        state: DensityOperator,
        params: BaseModel,
        cfg: OptimizerConfig,
        consts: PhysicalConstants,
    ) -> ScenarioResult:
        side = self.acted_label(state)
        self.constants = consts
        dilation = self.build(state, params)
        outcome = run_process(state, dilation)
        ledger = build_ledger(outcome, side, cfg)
        checks = evaluate_bounds(ledger, outcome)
        checks.append(check_asymmetric_erasure_bound(outcome, cfg))
        checks += self.extra_checks(state, dilation, outcome, ledger, params, cfg)
        result = ScenarioResult(
            name=self.get_name(),
            params=params,
            outcome=outcome,
            ledger=ledger,
            checks=tuple(checks),
            diagnostics=(check_classical_monotonicity(ledger),),
            work=erasure_work(ledger, consts),
        )
        logger.info(f"[SCENARIO] {result.name} all_checks_hold={result.all_checks_hold}")
        return result


def _pure_input_check(
    name: str,
    state: DensityOperator,
    lhs: float,
    rhs: float,
    tolerance: float,
    details: Optional[Dict[str, Any]] = None,
) -> BoundCheckResult:
    pure = state.is_pure()
    details = dict(details or {})
    if not pure:
        details["premise"] = "stated for pure AB inputs"
    return BoundCheckResult.evaluate(name, lhs, rhs, tolerance, applicable=pure, details=details)


def _sample_inputs(dim: int, label: str, seed: int) -> list[DensityOperator]:
    rng = trial_rng(seed, 0)
    dims = SubsystemDims.single(dim, label)
    return [random_density_matrix(dim, None, rng, dims) for _ in range(FIXED_OUTPUT_SAMPLES)]


class BleachParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dist: Optional[list[FiniteFloat]] = Field(default=None, description="Hiding distribution p_k; uniform by default.")


class Bleach(Scenario):
    """Hide the state of B in the environment; every input leaves B in sum_k p_k |k><k|."""

    def build(self, state: DensityOperator, params: BleachParams) -> UnitaryDilation:
        side = self.acted_label(state)
        d = state.subsystem_dim(side)
        dist = params.dist if params.dist is not None else [1.0 / d] * d
        return bleaching_dilation(dist, system_dim=d, acts_on=side)

    def extra_checks(self, state, dilation, outcome, ledger, params, cfg):
        transfer = _pure_input_check(
            "bleaching_transfer",
            state,
            abs(ledger.delta_D - ledger.S_B_before),
            0.0,
            ledger.tolerance,
            {"delta_D": ledger.delta_D, "S_B": ledger.S_B_before},
        )
        spread = fixed_output_spread(dilation, _sample_inputs(dilation.system_dim, dilation.acts_on, cfg.seed))
        fixed = BoundCheckResult.evaluate("fixed_output", spread, 0.0, FIXED_OUTPUT_TOL)
        return [transfer, fixed]


class ThermalizeParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    beta: FiniteFloat = Field(default=0.0, ge=0.0)
    energies: Optional[list[FiniteFloat]] = Field(default=None, description="Spectrum of H_B; 0, 1, 2, ... by default.")


def _spectrum(energies: Optional[list[float]], dim: int, gap: float = 1.0) -> np.ndarray:
    if energies is None:
        return np.diag(gap * np.arange(dim, dtype=float))
    if len(energies) != dim:
        raise InvalidParameterError(f"{len(energies)} energies given for a {dim}-dimensional system")
    return np.diag(np.asarray(energies, dtype=float))


class Thermalize(Scenario):
    """Replace the state of B by the Gibbs state of H_B at inverse temperature beta."""

    def build(self, state: DensityOperator, params: ThermalizeParams) -> UnitaryDilation:
        side = self.acted_label(state)
        hamiltonian = _spectrum(params.energies, state.subsystem_dim(side))
        return thermalizing_dilation(hamiltonian, params.beta, acts_on=side)

    def extra_checks(self, state, dilation, outcome, ledger, params, cfg):
        side = self.acted_label(state)
        gibbs = thermal_state(_spectrum(params.energies, state.subsystem_dim(side)), params.beta, label=side)
        output = partial_trace(outcome.reduced_AB_after, {side})
        distance = trace_distance(output, gibbs)
        return [
            _pure_input_check(
                "thermalization_cost",
                state,
                ledger.S_B_before,
                ledger.delta_S_T,
                ledger.tolerance,
                {"S_B": ledger.S_B_before},
            ),
            BoundCheckResult.evaluate("gibbs_output", distance, 0.0, FIXED_OUTPUT_TOL),
        ]


class DephaseParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    basis: Optional[MatrixRows] = Field(default=None, description="Measurement basis as columns; computational by default.")


class Dephase(Scenario):
    """Measure B in a basis and forget the outcome."""

    def build(self, state: DensityOperator, params: DephaseParams) -> UnitaryDilation:
        side = self.acted_label(state)
        basis = state.subsystem_dim(side) if params.basis is None else decode_matrix(params.basis)
        return stinespring_dilation(dephasing_measurement_channel(basis), acts_on=side)

    def extra_checks(self, state, dilation, outcome, ledger, params, cfg):
        return [BoundCheckResult.evaluate("quantum_classical_output", ledger.D_after, 0.0, ledger.tolerance)]


class LandauerParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    beta: FiniteFloat = Field(default=1.0, ge=0.0)
    bath_gap: FiniteFloat = Field(default=1.0, gt=0.0)
    purify_bath: bool = False


class Landauer(Scenario):
    """Swap B with a thermal bath of the same dimension and spectrum."""

    def _bath(self, state: DensityOperator, params: LandauerParams) -> np.ndarray:
        return _spectrum(None, state.subsystem_dim(self.acted_label(state)), params.bath_gap)

    def build(self, state: DensityOperator, params: LandauerParams) -> UnitaryDilation:
        dilation = swap_dilation(thermal_state(self._bath(state, params), params.beta), acts_on=self.acted_label(state))
        return purified_environment(dilation) if params.purify_bath else dilation

    def extra_checks(self, state, dilation, outcome, ledger, params, cfg):
        side = self.acted_label(state)
        bath_H = self._bath(state, params)
        swap = swap_dilation(thermal_state(bath_H, params.beta), acts_on=side)
        state_B = partial_trace(state, {side})
        return [check_landauer_uncorrelated(state_B, bath_H, params.beta, swap, system_H=bath_H, consts=self.constants)]


class KrausParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kraus: list[MatrixRows] = Field(min_length=1)
    env_dim: Optional[int] = Field(default=None, ge=1)


class Kraus(Scenario):
    """Dilate and run an arbitrary Kraus channel on B."""

    def build(self, state: DensityOperator, params: KrausParams) -> UnitaryDilation:
        channel = ChannelFile(kraus=params.kraus).to_channel()
        return stinespring_dilation(channel, params.env_dim, acts_on=self.acted_label(state))


BUILTIN_SCENARIOS: tuple[Type[Scenario], ...] = (Bleach, Thermalize, Dephase, Landauer, Kraus)


def build_report(
    result: ScenarioResult,
    state: DensityOperator,
    *,
    seed: int,
    tool_version: str,
    optimizer: OptimizerConfig,
    consts: PhysicalConstants,
) -> ReportRecord:
    """ReportRecord with every ledger field and every check, counted checks first."""
    parameters = result.params.model_dump(mode="json")
    records = [CheckRecord(**c.to_dict()) for c in result.checks]
    records += [CheckRecord(**c.to_dict(), counted=False) for c in result.diagnostics]
    return ReportRecord(
        scenario=result.name,
        inputs_digest=inputs_digest(state, parameters),
        tool_version=tool_version,
        seed=seed,
        parameters=parameters,
        optimizer={
            "grid_resolution": optimizer.grid_resolution,
            "refinement_iterations": optimizer.refinement_iterations,
            "random_restarts": optimizer.random_restarts,
            "convergence_tol": optimizer.convergence_tol,
            "slack": optimizer.slack,
            "measurement_class": MEASUREMENT_CLASS,
        },
        ledger=result.ledger.to_dict(),
        work={
            "work_joules": result.work.work,
            "minimum_work_joules": result.work.minimum_work,
            "temperature_K": consts.temperature,
            "boltzmann_k": consts.boltzmann_k,
            "joules_per_bit": consts.joules_per_bit,
        },
        checks=records,
        all_checks_hold=result.all_checks_hold,
        generated_at=utc_timestamp(),
    )

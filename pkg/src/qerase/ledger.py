"""Entropy bookkeeping of a dilated process and the inequalities it must satisfy.

Entropies are in bits. Energies convert with k*T*ln2 per bit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, NamedTuple, Union

import numpy as np
import numpy.typing as npt
from scipy import constants

from .channels import ProcessOutcome, UnitaryDilation, thermal_state
from .correlations import SUPPORTED_MEASURED_DIMS, OptimizerConfig, discord, quantum_mutual_information
from .decorator import speed
from .error_handling import InvalidParameterError
from .qmath import (
    DEFAULT_TOL,
    DensityOperator,
    partial_trace,
    quantum_relative_entropy,
    von_neumann_entropy,
)

logger = logging.getLogger("qerase")

# Tolerance of checks that involve no minimized quantity
EXACT_TOL = 1e-9

DetailValue = Union[float, str]


@dataclass(frozen=True)
class PhysicalConstants:
    """Boltzmann constant in J/K and bath temperature in K."""

    boltzmann_k: float = constants.k
    temperature: float = 300.0

    def __post_init__(self) -> None:
        for name in ("boltzmann_k", "temperature"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise InvalidParameterError(f"{name} must be finite and > 0, got {value}")

    @property
    def joules_per_bit(self) -> float:
        return self.boltzmann_k * self.temperature * math.log(2)


@dataclass(frozen=True)
class EntropyLedger:
    """Entropies and correlations of the AB system and the environment, before and after."""

    S_AB_before: float
    S_AB_after: float
    S_E_before: float
    S_E_after: float
    delta_S_T: float
    D_before: float
    D_after: float
    delta_D: float
    J_before: float
    J_after: float
    I_before: float
    I_after: float
    S_B_before: float
    S_B_after: float
    conditional_S_B_given_A: float
    optimizer_slack: float
    I_SE_after: float = 0.0
    measured_side: str = "B"

    @property
    def delta_S_AB(self) -> float:
        return self.S_AB_after - self.S_AB_before

    @property
    def delta_S_E(self) -> float:
        return self.S_E_after - self.S_E_before

    @property
    def delta_S_B(self) -> float:
        return self.S_B_after - self.S_B_before

    @property
    def delta_J(self) -> float:
        return self.J_before - self.J_after

    @property
    def delta_I(self) -> float:
        return self.I_before - self.I_after

    @property
    def tolerance(self) -> float:
        """Budget for checks that subtract two minimized quantities."""
        return 2 * self.optimizer_slack + EXACT_TOL

    def to_dict(self) -> dict[str, float]:
        values = asdict(self)
        values.pop("measured_side")
        values.update(
            delta_S_AB=self.delta_S_AB,
            delta_S_E=self.delta_S_E,
            delta_S_B=self.delta_S_B,
            delta_J=self.delta_J,
            delta_I=self.delta_I,
        )
        return values


@dataclass(frozen=True)
class BoundCheckResult:
    """One inequality lhs <= rhs + tolerance, with its premise and side conditions."""

    name: str
    lhs: float
    rhs: float
    tolerance: float
    satisfied: bool
    margin: float
    applicable: bool = True
    side_conditions: dict[str, bool] = field(default_factory=dict)
    details: dict[str, DetailValue] = field(default_factory=dict)

    @classmethod
    def evaluate(
        cls,
        name: str,
        lhs: float,
        rhs: float,
        tolerance: float,
        *,
        applicable: bool = True,
        side_conditions: dict[str, bool] | None = None,
        details: dict[str, DetailValue] | None = None,
    ) -> "BoundCheckResult":
        result = cls(
            name=name,
            lhs=float(lhs),
            rhs=float(rhs),
            tolerance=float(tolerance),
            satisfied=bool(lhs <= rhs + tolerance),
            margin=float(rhs - lhs),
            applicable=bool(applicable),
            side_conditions={k: bool(v) for k, v in (side_conditions or {}).items()},
            details=dict(details or {}),
        )
        if not result.holds:
            failed = [k for k, ok in result.side_conditions.items() if not ok]
            logger.warning(
                f"[CHECK] {name} violated: lhs={result.lhs:.12g} rhs={result.rhs:.12g} "
                f"margin={result.margin:.3e} tol={result.tolerance:.1e} failed_side_conditions={failed}"
            )
        else:
            logger.debug(f"[CHECK] {name} ok margin={result.margin:.3e}")
        return result

    @property
    def holds(self) -> bool:
        if not self.applicable:
            return True
        return self.satisfied and all(self.side_conditions.values())

    def to_dict(self) -> dict[str, Any]:
        values = asdict(self)
        values["holds"] = self.holds
        return values


class ErasureWork(NamedTuple):
    """Entropic work cost and its lower bound, in joules."""

    work: float
    minimum_work: float


def _other_label(state: DensityOperator, side: str) -> str:
    first, second = state.labels
    return first if side == second else second


@speed
def build_ledger(outcome: ProcessOutcome, side: str = "B", cfg: OptimizerConfig | None = None) -> EntropyLedger:
    """Entropies and correlations of a process outcome; both discords use the same ``cfg``."""
    cfg = cfg or OptimizerConfig()
    ab_before = outcome.reduced_AB_before
    ab_after = outcome.reduced_AB_after
    if len(ab_before.labels) != 2:
        raise InvalidParameterError(f"a bipartite AB state is required, got subsystems {list(ab_before.labels)}")

    before = discord(ab_before, side, cfg)
    after = discord(ab_after, side, cfg)

    acted = outcome.acted_on
    other = _other_label(ab_before, acted)
    S_AB_before = von_neumann_entropy(ab_before)
    S_AB_after = von_neumann_entropy(ab_after)
    S_E_before = von_neumann_entropy(outcome.reduced_E_before)
    S_E_after = von_neumann_entropy(outcome.reduced_E_after)
    S_A = von_neumann_entropy(partial_trace(ab_before, {other}))
    delta_S_T = (S_AB_after + S_E_after) - (S_AB_before + S_E_before)

    ledger = EntropyLedger(
        S_AB_before=S_AB_before,
        S_AB_after=S_AB_after,
        S_E_before=S_E_before,
        S_E_after=S_E_after,
        delta_S_T=delta_S_T,
        D_before=before.discord,
        D_after=after.discord,
        delta_D=before.discord - after.discord,
        J_before=before.classical_correlation,
        J_after=after.classical_correlation,
        I_before=before.mutual_information,
        I_after=after.mutual_information,
        S_B_before=von_neumann_entropy(partial_trace(ab_before, {acted})),
        S_B_after=von_neumann_entropy(partial_trace(ab_after, {acted})),
        conditional_S_B_given_A=S_AB_before - S_A,
        optimizer_slack=cfg.slack,
        I_SE_after=quantum_mutual_information(outcome.state_after, (outcome.system_labels, outcome.env_labels)),
        measured_side=side,
    )
    logger.info(
        f"[LEDGER] dS_T={delta_S_T:.9f} dD={ledger.delta_D:.9f} dJ={ledger.delta_J:.9f} dI={ledger.delta_I:.9f}"
    )
    return ledger


def check_erasure_bound(ledger: EntropyLedger) -> BoundCheckResult:
    """Erased discord never exceeds the total entropy produced."""
    return BoundCheckResult.evaluate("erasure_bound", ledger.delta_D, ledger.delta_S_T, ledger.tolerance)


def erasure_work(ledger: EntropyLedger, consts: PhysicalConstants | None = None) -> ErasureWork:
    """W = k*T*ln2*dS_T and W_min = k*T*ln2*dD."""
    consts = consts or PhysicalConstants()
    per_bit = consts.joules_per_bit
    result = ErasureWork(work=per_bit * ledger.delta_S_T, minimum_work=per_bit * ledger.delta_D)
    if result.work < result.minimum_work - per_bit * ledger.tolerance:
        logger.warning(f"[LEDGER] work {result.work:.6e} J below its minimum {result.minimum_work:.6e} J")
    return result


def check_creation_bound(ledger: EntropyLedger) -> BoundCheckResult:
    """Discord created from a zero-discord input is bounded by the negentropy spent: D_after >= -dS_T."""
    applicable = ledger.D_before <= ledger.optimizer_slack
    details: dict[str, DetailValue] = {"D_before": ledger.D_before}
    if not applicable:
        details["premise"] = "D_before exceeds the optimizer slack; the bound is stated for zero-discord inputs"
        logger.debug(f"[CHECK] creation_bound not applicable (D_before={ledger.D_before:.3e})")
    return BoundCheckResult.evaluate(
        "creation_bound",
        -ledger.delta_S_T,
        ledger.D_after,
        ledger.tolerance,
        applicable=applicable,
        details=details,
    )


def check_generalized_landauer(ledger: EntropyLedger) -> BoundCheckResult:
    """dS_B + dS_E >= dD + S(B|A) - S(B), with S(B|A) and S(B) of the input."""
    lhs = ledger.delta_D + ledger.conditional_S_B_given_A - ledger.S_B_before
    rhs = ledger.delta_S_B + ledger.delta_S_E
    return BoundCheckResult.evaluate(
        "generalized_landauer",
        lhs,
        rhs,
        ledger.tolerance,
        details={"conditional_S_B_given_A": ledger.conditional_S_B_given_A},
    )


def check_total_entropy(ledger: EntropyLedger) -> BoundCheckResult:
    """dS_T >= 0."""
    return BoundCheckResult.evaluate("total_entropy", -ledger.delta_S_T, 0.0, EXACT_TOL)


def check_classical_monotonicity(ledger: EntropyLedger) -> BoundCheckResult:
    """J cannot grow under a local operation on the measured side.

    Projective measurements are a subset of all measurements, so a small
    negative dJ can appear without any physical violation; it is logged, not counted.
    """
    result = BoundCheckResult.evaluate(
        "classical_monotonicity",
        -ledger.delta_J,
        0.0,
        2 * ledger.optimizer_slack,
        details={"delta_J": ledger.delta_J},
    )
    if not result.satisfied:
        logger.info(f"[CHECK] classical_monotonicity measurement-class artifact: dJ={ledger.delta_J:.3e}")
    return result


def check_mutual_info_compensation(outcome: ProcessOutcome) -> BoundCheckResult:
    """I(A:B) lost is at most I(AB:E) gained, which equals dS_T for a product start."""
    ab_before = outcome.reduced_AB_before
    ab_after = outcome.reduced_AB_after
    lhs = quantum_mutual_information(ab_before) - quantum_mutual_information(ab_after)
    rhs = quantum_mutual_information(outcome.state_after, (outcome.system_labels, outcome.env_labels))
    delta_S_T = (von_neumann_entropy(ab_after) + von_neumann_entropy(outcome.reduced_E_after)) - (
        von_neumann_entropy(ab_before) + von_neumann_entropy(outcome.reduced_E_before)
    )
    return BoundCheckResult.evaluate(
        "mutual_info_compensation",
        lhs,
        rhs,
        EXACT_TOL,
        side_conditions={
            "local_monotonicity": lhs >= -EXACT_TOL,
            "matches_total_entropy": abs(rhs - delta_S_T) <= EXACT_TOL,
        },
        details={"delta_S_T": delta_S_T},
    )


def check_asymmetric_erasure_bound(outcome: ProcessOutcome, cfg: OptimizerConfig | None = None) -> BoundCheckResult:
    """Same bound for the discord measured on the untouched side, which cannot grow."""
    cfg = cfg or OptimizerConfig()
    ab_before = outcome.reduced_AB_before
    untouched = _other_label(ab_before, outcome.acted_on)
    if ab_before.subsystem_dim(untouched) not in SUPPORTED_MEASURED_DIMS:
        return BoundCheckResult.evaluate(
            "asymmetric_erasure_bound",
            0.0,
            0.0,
            2 * cfg.slack + EXACT_TOL,
            applicable=False,
            details={"measured_side": untouched, "premise": "measured side outside the optimizer range"},
        )
    d_before = discord(ab_before, untouched, cfg).discord
    d_after = discord(outcome.reduced_AB_after, untouched, cfg).discord
    delta = d_before - d_after
    delta_S_T = (von_neumann_entropy(outcome.reduced_AB_after) + von_neumann_entropy(outcome.reduced_E_after)) - (
        von_neumann_entropy(ab_before) + von_neumann_entropy(outcome.reduced_E_before)
    )
    return BoundCheckResult.evaluate(
        "asymmetric_erasure_bound",
        delta,
        delta_S_T,
        2 * cfg.slack + EXACT_TOL,
        side_conditions={"non_negative": delta >= -2 * cfg.slack},
        details={"measured_side": untouched, "D_before": d_before, "D_after": d_after},
    )


def _energy(state: DensityOperator, hamiltonian: np.ndarray) -> float:
    return float(np.real(np.trace(state.matrix @ hamiltonian)))


def check_landauer_uncorrelated(
    state_B: DensityOperator,
    bath_H: npt.ArrayLike,
    beta: float,
    dilation: UnitaryDilation,
    system_H: npt.ArrayLike | None = None,
    consts: PhysicalConstants | None = None,
) -> BoundCheckResult:
    """Entropy removed from B is paid for by heat into a thermal bath: S(B) - S(B') <= beta*dE/ln2.

    With B' pure this is dE >= k*T*ln2*S(B). Energies are in the units of ``bath_H``;
    with ``consts`` the heat is also given in joules, reading beta as 1/(k*T).
    """
    bath_H = np.asarray(bath_H, dtype=np.complex128)
    bath = thermal_state(bath_H, beta, label=dilation.env_labels[0])
    if not dilation.env_state.close_to(bath, DEFAULT_TOL):
        raise InvalidParameterError("the dilation's environment is not the thermal state of bath_H at beta")

    state_B_after = dilation.induced_channel(state_B)
    bath_after = dilation.environment_output(state_B)
    delta_E = _energy(bath_after, bath_H) - _energy(dilation.env_state, bath_H)
    S_B = von_neumann_entropy(state_B)
    delta_S_B = von_neumann_entropy(state_B_after) - S_B
    delta_S_E = von_neumann_entropy(bath_after) - von_neumann_entropy(dilation.env_state)

    relative = quantum_relative_entropy(bath_after, dilation.env_state)
    lhs = -delta_S_B
    rhs = beta * delta_E / math.log(2)
    side_conditions = {"entropy_relation": delta_S_B + delta_S_E >= -EXACT_TOL}
    details: dict[str, DetailValue] = {
        "S_B": S_B,
        "S_B_after": S_B - lhs,
        "delta_S_E": delta_S_E,
        "delta_E_bath": delta_E,
        "heat_bits": rhs,
        "landauer_minimum_bits": S_B,
        "relative_entropy_bath": relative if math.isfinite(relative) else "inf",
    }
    if consts is not None:
        details["heat_joules"] = rhs * consts.joules_per_bit
        details["landauer_minimum_joules"] = S_B * consts.joules_per_bit
    if system_H is None:
        details["energy_conservation"] = "not evaluated"
    else:
        system_H = np.asarray(system_H, dtype=np.complex128)
        delta_E_B = _energy(state_B_after, system_H) - _energy(state_B, system_H)
        details["delta_E_system"] = delta_E_B
        side_conditions["energy_conservation"] = abs(delta_E_B + delta_E) <= EXACT_TOL
    return BoundCheckResult.evaluate(
        "landauer_uncorrelated", lhs, rhs, EXACT_TOL, side_conditions=side_conditions, details=details
    )


def evaluate_bounds(ledger: EntropyLedger, outcome: ProcessOutcome) -> list[BoundCheckResult]:
    """The five campaign checks: erasure, creation, generalized Landauer, compensation, total entropy."""
    return [
        check_erasure_bound(ledger),
        check_creation_bound(ledger),
        check_generalized_landauer(ledger),
        check_mutual_info_compensation(outcome),
        check_total_entropy(ledger),
    ]

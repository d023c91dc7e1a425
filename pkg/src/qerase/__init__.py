"""qerase: entropy cost of erasing quantum correlations."""

__version__ = "0.1.0"

from .channels import (
    KrausChannel,
    ProcessOutcome,
    UnitaryDilation,
    apply_channel,
    apply_local_channel,
    bleaching_dilation,
    channels_equal,
    dephasing_measurement_channel,
    purified_environment,
    run_process,
    stinespring_dilation,
    swap_dilation,
    thermal_state,
    thermalizing_channel,
    thermalizing_dilation,
)
from .core import Core
from .correlations import (
    CorrelationReport,
    OptimizerConfig,
    ProjectiveMeasurement,
    classical_correlation,
    conditional_entropy,
    discord,
    measured_conditional_entropy,
    quantum_mutual_information,
)
from .decorator import log, speed
from .ensembles import EnsembleConfig, MonteCarloSummary, monte_carlo_verify
from .ledger import BoundCheckResult, EntropyLedger, PhysicalConstants, build_ledger, evaluate_bounds
from .qmath import DensityOperator, PureStateVector, SubsystemDims, partial_trace, von_neumann_entropy
from .scenario import Scenario

__all__ = [
    "Core", "Scenario",
    "DensityOperator", "PureStateVector", "SubsystemDims", "partial_trace", "von_neumann_entropy",
    "CorrelationReport", "OptimizerConfig", "ProjectiveMeasurement",
    "quantum_mutual_information", "conditional_entropy", "measured_conditional_entropy",
    "classical_correlation", "discord",
    "KrausChannel", "UnitaryDilation", "ProcessOutcome",
    "apply_channel", "apply_local_channel", "stinespring_dilation", "run_process",
    "thermal_state", "thermalizing_channel", "thermalizing_dilation", "bleaching_dilation",
    "dephasing_measurement_channel", "swap_dilation", "purified_environment", "channels_equal",
    "EntropyLedger", "BoundCheckResult", "PhysicalConstants", "build_ledger", "evaluate_bounds",
    "EnsembleConfig", "MonteCarloSummary", "monte_carlo_verify",
    "log", "speed",
]

"""Mutual information, classical correlation and quantum discord of bipartite states.

The measured conditional entropy is minimized over rank-1 orthogonal projective
measurements on one side: a coarse parameter grid, then Nelder-Mead refinement
from the best grid point and from seeded random restarts.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
import numpy.typing as npt
from scipy.optimize import minimize

from .decorator import log, speed
from .error_handling import DimensionMismatchError, InvalidParameterError, UnsupportedDimensionError
from .qmath import (
    ComplexMatrix,
    DensityOperator,
    SubsystemDims,
    matrices_close,
    partial_trace,
    von_neumann_entropy,
    xlog2x,
)

logger = logging.getLogger("qerase")

MEASUREMENT_CLASS = "rank1-projective"
SUPPORTED_MEASURED_DIMS = (2, 3, 4)
# Outcomes less likely than this are dropped from conditional averages
BRANCH_CUTOFF = 1e-12
MEASUREMENT_TOL = 1e-10


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings of the measurement minimizer."""

    grid_resolution: int = 64
    refinement_iterations: int = 200
    random_restarts: int = 8
    seed: int = 0
    convergence_tol: float = 1e-7

    def __post_init__(self) -> None:
        if self.grid_resolution < 8:
            raise InvalidParameterError(f"grid_resolution must be >= 8, got {self.grid_resolution}")
        if self.refinement_iterations < 0:
            raise InvalidParameterError(f"refinement_iterations must be >= 0, got {self.refinement_iterations}")
        if self.random_restarts < 0:
            raise InvalidParameterError(f"random_restarts must be >= 0, got {self.random_restarts}")
        if self.seed < 0:
            raise InvalidParameterError(f"seed must be unsigned, got {self.seed}")
        if not self.convergence_tol > 0:
            raise InvalidParameterError(f"convergence_tol must be > 0, got {self.convergence_tol}")

    @property
    def slack(self) -> float:
        """Gap budgeted between the returned minimum and the true infimum, in bits."""
        return 2 * self.convergence_tol


@dataclass(frozen=True, eq=False)
class ProjectiveMeasurement:
    """Complete set of orthogonal rank-1 projectors on one subsystem."""

    side: str
    projectors: tuple[ComplexMatrix, ...]
    dim: int

    def __post_init__(self) -> None:
        projectors = tuple(np.array(p, dtype=np.complex128) for p in self.projectors)
        identity = np.eye(self.dim)
        total = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for i, proj in enumerate(projectors):
            if proj.shape != (self.dim, self.dim):
                raise DimensionMismatchError(f"projector {i} has shape {proj.shape}, expected {(self.dim, self.dim)}")
            if not matrices_close(proj, proj.conj().T, MEASUREMENT_TOL):
                raise InvalidParameterError(f"projector {i} is not Hermitian")
            if not matrices_close(proj @ proj, proj, MEASUREMENT_TOL) or abs(np.trace(proj) - 1) > MEASUREMENT_TOL:
                raise InvalidParameterError(f"projector {i} is not a rank-1 projector")
            for j in range(i):
                if not matrices_close(proj @ projectors[j], 0 * proj, MEASUREMENT_TOL):
                    raise InvalidParameterError(f"projectors {j} and {i} are not orthogonal")
            proj.setflags(write=False)
            total += proj
        if not matrices_close(total, identity, MEASUREMENT_TOL):
            raise InvalidParameterError("projectors do not sum to the identity")
        object.__setattr__(self, "projectors", projectors)

    @classmethod
    def from_basis(cls, side: str, basis: npt.ArrayLike) -> "ProjectiveMeasurement":
        """Projectors onto the columns of a unitary ``basis``."""
        basis = np.asarray(basis, dtype=np.complex128)
        if basis.ndim != 2 or basis.shape[0] != basis.shape[1]:
            raise DimensionMismatchError(f"measurement basis must be square, got shape {basis.shape}")
        projectors = tuple(np.outer(basis[:, i], basis[:, i].conj()) for i in range(basis.shape[1]))
        return cls(side, projectors, basis.shape[0])

    @classmethod
    def computational(cls, side: str, dim: int) -> "ProjectiveMeasurement":
        return cls.from_basis(side, np.eye(dim))

    def basis(self) -> ComplexMatrix:
        """Unit vectors spanning each projector, as columns."""
        columns = [np.linalg.eigh(p)[1][:, -1] for p in self.projectors]
        return np.column_stack(columns)


@dataclass(frozen=True, eq=False)
class MeasurementBranch:
    probability: float
    conditional_state: DensityOperator
    # True when the outcome is too unlikely to define a conditional state;
    # conditional_state is then a maximally mixed placeholder
    degenerate: bool = False


@dataclass(frozen=True, eq=False)
class CorrelationReport:
    """Correlations of one bipartite state for one measured side, all in bits."""

    mutual_information: float
    classical_correlation: float
    discord: float
    conditional_entropy: float
    measured_conditional_entropy: float
    optimal_measurement: ProjectiveMeasurement
    measured_side: str
    optimizer_slack: float
    measurement_class: str = MEASUREMENT_CLASS

    def to_dict(self) -> dict[str, Any]:
        from .formats import encode_matrix

        return {
            "measured_side": self.measured_side,
            "measurement_class": self.measurement_class,
            "units": "bits",
            "mutual_information": self.mutual_information,
            "classical_correlation": self.classical_correlation,
            "discord": self.discord,
            "conditional_entropy": self.conditional_entropy,
            "measured_conditional_entropy": self.measured_conditional_entropy,
            "optimizer_slack": self.optimizer_slack,
            "optimal_basis": encode_matrix(self.optimal_measurement.basis()),
        }


def _split_sides(state: DensityOperator, side: str) -> tuple[str, str]:
    """Return (unmeasured, measured) labels of a bipartite state."""
    labels = state.labels
    if len(labels) != 2:
        raise InvalidParameterError(f"a bipartite state is required, got subsystems {list(labels)}")
    if side not in labels:
        raise InvalidParameterError(f"unknown subsystem label {side!r}; known labels are {list(labels)}")
    other = labels[0] if side == labels[1] else labels[1]
    return other, side


def _measured_tensor(state: DensityOperator, side: str) -> np.ndarray:
    """State as a tensor indexed (unmeasured, measured, unmeasured, measured)."""
    other, measured = _split_sides(state, side)
    d_u = state.subsystem_dim(other)
    d_m = state.subsystem_dim(measured)
    if state.labels[0] == measured:
        return state.matrix.reshape(d_m, d_u, d_m, d_u).transpose(1, 0, 3, 2)
    return state.matrix.reshape(d_u, d_m, d_u, d_m)


def _subsystem_entropy(state: DensityOperator, label: str) -> float:
    if state.labels == (label,):
        return von_neumann_entropy(state)
    return von_neumann_entropy(partial_trace(state, {label}))


@log(include_result=False)
def quantum_mutual_information(
    state: DensityOperator,
    cut: tuple[Sequence[str], Sequence[str]] | None = None,
) -> float:
    """I = S(X) + S(Y) - S(XY) across the partition ``cut``."""
    if cut is None:
        if len(state.labels) != 2:
            raise InvalidParameterError(f"a cut is required for subsystems {list(state.labels)}")
        cut = ((state.labels[0],), (state.labels[1],))
    left, right = set(cut[0]), set(cut[1])
    if not left or not right or left & right or left | right != set(state.labels):
        raise InvalidParameterError(f"{cut} is not a partition of subsystems {list(state.labels)}")
    s_left = von_neumann_entropy(partial_trace(state, left))
    s_right = von_neumann_entropy(partial_trace(state, right))
    return s_left + s_right - von_neumann_entropy(state)


def conditional_entropy(state: DensityOperator, given: str) -> float:
    """S(X|given) = S(XY) - S(given); negative for some entangled states."""
    _split_sides(state, given)
    return von_neumann_entropy(state) - _subsystem_entropy(state, given)


def measure_branches(state: DensityOperator, m: ProjectiveMeasurement) -> list[MeasurementBranch]:
    """Outcome probabilities and normalized post-measurement states of the unmeasured side."""
    other, measured = _split_sides(state, m.side)
    if m.dim != state.subsystem_dim(measured):
        raise DimensionMismatchError(
            f"measurement acts on dimension {m.dim} but subsystem {measured!r} has dimension {state.subsystem_dim(measured)}"
        )
    tensor = _measured_tensor(state, measured)
    dims = SubsystemDims.single(state.subsystem_dim(other), other)

    branches = []
    for proj in m.projectors:
        # Tr_M[(I (x) P) rho (I (x) P)] = Tr_M[(I (x) P) rho] for a projector P
        unnormalized = np.einsum("db,abcd->ac", proj, tensor)
        probability = float(np.real(np.trace(unnormalized)))
        if probability < BRANCH_CUTOFF:
            branches.append(MeasurementBranch(max(probability, 0.0), DensityOperator.maximally_mixed(dims), True))
            continue
        # normalizing divides rounding errors by the probability too
        tol = max(state.tol, state.tol / probability)
        branches.append(MeasurementBranch(probability, DensityOperator(unnormalized / probability, dims, tol)))
    return branches


def average_conditional_entropy(state: DensityOperator, m: ProjectiveMeasurement) -> float:
    """sum_i p_i S(rho_{.|i}) for one fixed measurement."""
    return float(
        sum(b.probability * von_neumann_entropy(b.conditional_state) for b in measure_branches(state, m) if not b.degenerate)
    )


def _parameter_count(dim: int) -> int:
    return 2 if dim == 2 else dim * (dim - 1)


def _bases(params: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal bases (as columns) for a batch of parameter vectors, shape (G, dim, dim).

    dim 2 uses Bloch angles (theta, phi); larger dims use a product of complex
    Givens rotations, one (angle, phase) pair per index pair.
    """
    count = params.shape[0]
    if dim == 2:
        half = params[:, 0] / 2
        phase = np.exp(1j * params[:, 1])
        bases = np.empty((count, 2, 2), dtype=np.complex128)
        bases[:, 0, 0] = np.cos(half)
        bases[:, 1, 0] = phase * np.sin(half)
        bases[:, 0, 1] = -phase.conj() * np.sin(half)
        bases[:, 1, 1] = np.cos(half)
        return bases

    bases = np.broadcast_to(np.eye(dim, dtype=np.complex128), (count, dim, dim)).copy()
    for k, (i, j) in enumerate(itertools.combinations(range(dim), 2)):
        theta = params[:, 2 * k]
        phase = np.exp(1j * params[:, 2 * k + 1])
        rotation = np.broadcast_to(np.eye(dim, dtype=np.complex128), (count, dim, dim)).copy()
        rotation[:, i, i] = np.cos(theta)
        rotation[:, j, j] = np.cos(theta)
        rotation[:, i, j] = -phase.conj() * np.sin(theta)
        rotation[:, j, i] = phase * np.sin(theta)
        bases = bases @ rotation
    return bases


def _average_entropies(tensor: np.ndarray, bases: np.ndarray) -> np.ndarray:
    """Vectorized sum_i p_i S(rho_{.|i}) for every basis in the batch."""
    unnormalized = np.einsum("gbi,abcd,gdi->giac", bases.conj(), tensor, bases)
    eigenvalues = np.linalg.eigvalsh(unnormalized)
    probabilities = eigenvalues.sum(axis=-1)
    # p S(sigma / p) = -sum mu log mu + p log p for the unnormalized sigma with eigenvalues mu
    terms = -xlog2x(eigenvalues).sum(axis=-1) + xlog2x(probabilities)
    terms = np.where(probabilities >= BRANCH_CUTOFF, terms, 0.0)
    return terms.sum(axis=-1)


def _random_parameters(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    params = np.empty((count, _parameter_count(dim)))
    params[:, 0::2] = rng.uniform(0.0, np.pi, size=(count, _parameter_count(dim) // 2))
    params[:, 1::2] = rng.uniform(0.0, 2 * np.pi, size=(count, _parameter_count(dim) // 2))
    return params


def _grid(dim: int, cfg: OptimizerConfig, rng: np.random.Generator) -> np.ndarray:
    res = cfg.grid_resolution
    if dim == 2:
        theta, phi = np.meshgrid(
            np.linspace(0.0, np.pi, res),
            np.linspace(0.0, 2 * np.pi, res, endpoint=False),
            indexing="ij",
        )
        return np.column_stack([theta.ravel(), phi.ravel()])
    # An exhaustive grid is out of reach in dim*(dim-1) coordinates; sample as many
    # points as the qubit grid would have, always including the computational basis
    points = _random_parameters(dim, res * res - 1, rng)
    return np.vstack([np.zeros((1, _parameter_count(dim))), points])


@speed
def measured_conditional_entropy(
    state: DensityOperator,
    side: str,
    cfg: OptimizerConfig | None = None,
) -> tuple[float, ProjectiveMeasurement]:
    """min over rank-1 projective measurements on ``side`` of sum_i p_i S(rho_{.|i}).

    Returns the value and the minimizing measurement. The value is an upper
    bound on the true minimum within ``cfg.slack``.
    """
    cfg = cfg or OptimizerConfig()
    _, measured = _split_sides(state, side)
    dim = state.subsystem_dim(measured)
    if dim not in SUPPORTED_MEASURED_DIMS:
        raise UnsupportedDimensionError(
            f"measured subsystem {measured!r} has dimension {dim}; supported dimensions are {list(SUPPORTED_MEASURED_DIMS)}"
        )

    tensor = _measured_tensor(state, measured)
    rng = np.random.default_rng(cfg.seed)

    grid = _grid(dim, cfg, rng)
    values = _average_entropies(tensor, _bases(grid, dim))
    best = int(np.argmin(values))
    best_params, best_value = grid[best], float(values[best])

    def objective(x: np.ndarray) -> float:
        return float(_average_entropies(tensor, _bases(x[None, :], dim))[0])

    starts = [grid[best]] + list(_random_parameters(dim, cfg.random_restarts, rng))
    if cfg.refinement_iterations > 0:
        for x0 in starts:
            result = minimize(
                objective,
                x0,
                method="Nelder-Mead",
                options={
                    "maxiter": cfg.refinement_iterations,
                    "xatol": 1e-7,
                    "fatol": cfg.convergence_tol,
                },
            )
            if result.fun < best_value:
                best_params, best_value = result.x, float(result.fun)

    measurement = ProjectiveMeasurement.from_basis(measured, _bases(best_params[None, :], dim)[0])
    value = average_conditional_entropy(state, measurement)
    logger.debug(f"[DISCORD] min conditional entropy on {measured} = {value:.12g} (grid best {float(values[best]):.12g})")
    return value, measurement


def classical_correlation(state: DensityOperator, side: str, cfg: OptimizerConfig | None = None) -> float:
    """J = S(unmeasured) - min sum_i p_i S(rho_{unmeasured|i})."""
    other, _ = _split_sides(state, side)
    value, _ = measured_conditional_entropy(state, side, cfg)
    return _subsystem_entropy(state, other) - value


@log(include_args=False, include_result=False)
def discord(state: DensityOperator, side: str = "B", cfg: OptimizerConfig | None = None) -> CorrelationReport:
    """Full correlation report with the discord for measurements on ``side``."""
    cfg = cfg or OptimizerConfig()
    other, measured = _split_sides(state, side)
    s_joint = von_neumann_entropy(state)
    s_other = _subsystem_entropy(state, other)
    s_measured = _subsystem_entropy(state, measured)

    min_entropy, measurement = measured_conditional_entropy(state, measured, cfg)
    mutual = s_other + s_measured - s_joint
    classical = s_other - min_entropy
    report = CorrelationReport(
        mutual_information=mutual,
        classical_correlation=classical,
        discord=mutual - classical,
        conditional_entropy=s_joint - s_measured,
        measured_conditional_entropy=min_entropy,
        optimal_measurement=measurement,
        measured_side=measured,
        optimizer_slack=cfg.slack,
    )
    logger.info(f"[DISCORD] side={measured} I={mutual:.9f} J={classical:.9f} D={report.discord:.9f}")
    return report


def discord_asymmetric_check(state: DensityOperator, cfg: OptimizerConfig | None = None) -> tuple[float, float]:
    """(D_B, D_A): discord measured on the second and on the first subsystem."""
    _split_sides(state, state.labels[-1])
    first, second = state.labels
    d_second = discord(state, second, cfg).discord
    d_first = discord(state, first, cfg).discord
    return d_second, d_first

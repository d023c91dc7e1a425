"""Quantum channels as Kraus families, their unitary dilations, and the named erasure processes.

A dilation's unitary acts on ``system (x) environment`` with the system as the
slow index; the environment may itself be composite (``E`` then ``R``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
import numpy.typing as npt

from .decorator import log
from .error_handling import DimensionMismatchError, InvalidParameterError
from .qmath import (
    DEFAULT_TOL,
    EIGEN_CLAMP,
    ComplexMatrix,
    DensityOperator,
    PureStateVector,
    SubsystemDims,
    apply_on_subsystems,
    hermitian_eigen,
    matrices_close,
    partial_trace,
    purify,
    von_neumann_entropy,
)

logger = logging.getLogger("qerase")

COMPLETENESS_TOL = 1e-10
UNITARITY_TOL = 1e-10
BASIS_TOL = 1e-10


def _orthonormal_columns(basis: npt.ArrayLike, name: str, rows: int | None = None) -> ComplexMatrix:
    basis = np.array(basis, dtype=np.complex128)
    if basis.ndim != 2:
        raise InvalidParameterError(f"{name} must be a 2-D array of column vectors, got shape {basis.shape}")
    if rows is not None and basis.shape[0] != rows:
        raise DimensionMismatchError(f"{name} vectors have dimension {basis.shape[0]}, expected {rows}")
    if basis.shape[1] > basis.shape[0]:
        raise InvalidParameterError(f"{name} has {basis.shape[1]} vectors in dimension {basis.shape[0]}")
    if not matrices_close(basis.conj().T @ basis, np.eye(basis.shape[1]), BASIS_TOL):
        raise InvalidParameterError(f"{name} is not orthonormal")
    return basis


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """CPTP map rho -> sum_k K_k rho K_k^dagger."""

    kraus_ops: tuple[ComplexMatrix, ...]
    dim_in: int = 0
    dim_out: int = 0

    def __post_init__(self) -> None:
        ops = tuple(np.array(k, dtype=np.complex128) for k in self.kraus_ops)
        if not ops:
            raise InvalidParameterError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if len(shape) != 2:
            raise DimensionMismatchError(f"Kraus operators must be matrices, got shape {shape}")
        for i, op in enumerate(ops):
            if op.shape != shape:
                raise DimensionMismatchError(f"Kraus operator {i} has shape {op.shape}, expected {shape}")
            if not np.all(np.isfinite(op)):
                raise InvalidParameterError(f"Kraus operator {i} has non-finite entries")
        dim_out, dim_in = shape
        if (self.dim_in and self.dim_in != dim_in) or (self.dim_out and self.dim_out != dim_out):
            raise DimensionMismatchError(
                f"Kraus operators are {dim_out}x{dim_in}, declared {self.dim_out}x{self.dim_in}"
            )

        completeness = sum(op.conj().T @ op for op in ops)
        if not matrices_close(completeness, np.eye(dim_in), COMPLETENESS_TOL):
            defect = float(np.max(np.abs(completeness - np.eye(dim_in))))
            raise InvalidParameterError(f"Kraus operators are not trace preserving (max |sum K^dagger K - I| = {defect:.3e})")

        for op in ops:
            op.setflags(write=False)
        object.__setattr__(self, "kraus_ops", ops)
        object.__setattr__(self, "dim_in", dim_in)
        object.__setattr__(self, "dim_out", dim_out)

    @classmethod
    def identity(cls, dim: int) -> "KrausChannel":
        return cls((np.eye(dim),))

    @property
    def kraus_count(self) -> int:
        return len(self.kraus_ops)

    @property
    def is_square(self) -> bool:
        return self.dim_in == self.dim_out

    def apply_matrix(self, matrix: npt.ArrayLike) -> ComplexMatrix:
        """The channel as a linear map on arbitrary dim_in x dim_in operators."""
        matrix = np.asarray(matrix, dtype=np.complex128)
        if matrix.shape != (self.dim_in, self.dim_in):
            raise DimensionMismatchError(f"channel takes {self.dim_in}x{self.dim_in} inputs, got shape {matrix.shape}")
        return sum(op @ matrix @ op.conj().T for op in self.kraus_ops)


@dataclass(frozen=True, eq=False)
class UnitaryDilation:
    """Unitary on system (x) environment plus the environment's initial state."""

    unitary: ComplexMatrix
    env_dim: int
    env_state: DensityOperator
    acts_on: str = "B"

    def __post_init__(self) -> None:
        unitary = np.array(self.unitary, dtype=np.complex128)
        if unitary.ndim != 2 or unitary.shape[0] != unitary.shape[1]:
            raise DimensionMismatchError(f"dilation unitary must be square, got shape {unitary.shape}")
        if self.env_dim < 1 or unitary.shape[0] % self.env_dim:
            raise DimensionMismatchError(f"unitary of size {unitary.shape[0]} does not factor over env_dim {self.env_dim}")
        if self.env_state.dim != self.env_dim:
            raise DimensionMismatchError(f"environment state has dimension {self.env_state.dim}, expected {self.env_dim}")
        if self.acts_on in self.env_state.labels:
            raise InvalidParameterError(f"system label {self.acts_on!r} clashes with the environment labels")
        if not matrices_close(unitary.conj().T @ unitary, np.eye(unitary.shape[0]), UNITARITY_TOL):
            raise InvalidParameterError("dilation matrix is not unitary")
        unitary.setflags(write=False)
        object.__setattr__(self, "unitary", unitary)

    @property
    def system_dim(self) -> int:
        return self.unitary.shape[0] // self.env_dim

    @property
    def env_labels(self) -> tuple[str, ...]:
        return self.env_state.labels

    def _evolve(self, matrix: npt.ArrayLike) -> np.ndarray:
        matrix = np.asarray(matrix, dtype=np.complex128)
        d, e = self.system_dim, self.env_dim
        if matrix.shape != (d, d):
            raise DimensionMismatchError(f"dilation takes {d}x{d} system inputs, got shape {matrix.shape}")
        joint = self.unitary @ np.kron(matrix, self.env_state.matrix) @ self.unitary.conj().T
        return joint.reshape(d, e, d, e)

    def induced_matrix(self, matrix: npt.ArrayLike) -> ComplexMatrix:
        """Tr_E[U (M (x) rho_E) U^dagger] for any system operator M."""
        return np.trace(self._evolve(matrix), axis1=1, axis2=3)

    def induced_channel(self, state: DensityOperator) -> DensityOperator:
        return DensityOperator(self.induced_matrix(state.matrix), state.dims, state.tol)

    def environment_output(self, state: DensityOperator) -> DensityOperator:
        """Complementary channel: the environment after the interaction."""
        return DensityOperator(np.trace(self._evolve(state.matrix), axis1=0, axis2=2), self.env_state.dims, state.tol)

    def to_kraus(self) -> KrausChannel:
        """Kraus family of the induced channel, one operator per (output env, env eigenvector) pair."""
        d, e = self.system_dim, self.env_dim
        blocks = self.unitary.reshape(d, e, d, e)
        weights, vectors = np.linalg.eigh(self.env_state.matrix)
        ops = []
        for weight, vector in zip(weights, vectors.T):
            if weight <= EIGEN_CLAMP:
                continue
            column = np.einsum("mkif,f->kmi", blocks, vector)
            ops.extend(np.sqrt(weight) * column[k] for k in range(e))
        return KrausChannel(tuple(ops))


@dataclass(frozen=True, eq=False)
class ProcessOutcome:
    """Global states before and after one dilated process on an AB state."""

    state_before: DensityOperator
    state_after: DensityOperator
    reduced_AB_before: DensityOperator
    reduced_AB_after: DensityOperator
    reduced_E_before: DensityOperator
    reduced_E_after: DensityOperator
    acted_on: str
    system_labels: tuple[str, ...]
    env_labels: tuple[str, ...]

    @property
    def entropy_drift(self) -> float:
        """|S(after) - S(before)| of the global state; zero up to rounding."""
        return abs(von_neumann_entropy(self.state_after) - von_neumann_entropy(self.state_before))


@log(include_result=False)
def apply_channel(ch: KrausChannel, state: DensityOperator) -> DensityOperator:
    """sum_k K_k rho K_k^dagger on the whole state."""
    if state.dim != ch.dim_in:
        raise DimensionMismatchError(f"channel takes dimension {ch.dim_in}, state has dimension {state.dim}")
    if ch.is_square:
        dims = state.dims
    elif len(state.labels) == 1:
        dims = SubsystemDims.single(ch.dim_out, state.labels[0])
    else:
        raise DimensionMismatchError("a dimension-changing channel needs a single-subsystem state")
    return DensityOperator(ch.apply_matrix(state.matrix), dims, state.tol)


def apply_local_channel(ch: KrausChannel, state: DensityOperator, side: str) -> DensityOperator:
    """(I (x) E)(rho) with E acting on the ``side`` factor only."""
    index = state.dims.index(side)
    if not ch.is_square:
        raise DimensionMismatchError(f"local channels must be square, got {ch.dim_out}x{ch.dim_in}")
    if state.dims.dims[index] != ch.dim_in:
        raise DimensionMismatchError(
            f"channel takes dimension {ch.dim_in}, subsystem {side!r} has dimension {state.dims.dims[index]}"
        )
    matrix = apply_on_subsystems(state.matrix, state.dims.dims, ch.kraus_ops, [index])
    return DensityOperator(matrix, state.dims, state.tol)


def _pure_env_state(env_dim: int, label: str) -> DensityOperator:
    ground = np.zeros((env_dim, env_dim), dtype=np.complex128)
    ground[0, 0] = 1
    return DensityOperator(ground, SubsystemDims.single(env_dim, label))


def _complete_isometry(isometry: np.ndarray, system_dim: int, env_dim: int) -> ComplexMatrix:
    """Unitary whose columns |i>|0> equal the isometry's columns; the rest come from QR."""
    size = system_dim * env_dim
    q, _ = np.linalg.qr(np.hstack([isometry, np.eye(size)]))
    complement = q[:, system_dim:]
    unitary = np.empty((size, size), dtype=np.complex128)
    fixed = [i * env_dim for i in range(system_dim)]
    free = [c for c in range(size) if c % env_dim]
    unitary[:, fixed] = isometry
    unitary[:, free] = complement
    return unitary


@log(include_result=False)
def stinespring_dilation(
    ch: KrausChannel,
    env_dim: int | None = None,
    *,
    acts_on: str = "B",
    env_label: str = "E",
) -> UnitaryDilation:
    """Dilation V|i> = sum_k K_k|i> (x) |k>_E started from |0><0|_E.

    ``env_dim`` defaults to the Kraus count; a larger environment pads with zero operators.
    """
    if not ch.is_square:
        raise DimensionMismatchError(f"only square channels can be dilated, got {ch.dim_out}x{ch.dim_in}")
    env_dim = ch.kraus_count if env_dim is None else int(env_dim)
    if env_dim < ch.kraus_count:
        raise InvalidParameterError(f"env_dim {env_dim} is smaller than the Kraus count {ch.kraus_count}")

    d = ch.dim_in
    stacked = np.zeros((env_dim, d, d), dtype=np.complex128)
    stacked[: ch.kraus_count] = np.stack(ch.kraus_ops)
    # row index m*env_dim + k holds K_k[m, i]
    isometry = stacked.transpose(1, 0, 2).reshape(d * env_dim, d)
    unitary = _complete_isometry(isometry, d, env_dim)
    return UnitaryDilation(unitary, env_dim, _pure_env_state(env_dim, env_label), acts_on)


@log(include_result=False)
def run_process(state_AB: DensityOperator, dilation: UnitaryDilation) -> ProcessOutcome:
    """Evolve state_AB (x) rho_E with I (x) U on the acted-on subsystem and the environment."""
    side = dilation.acts_on
    if side not in state_AB.labels:
        raise InvalidParameterError(f"dilation acts on {side!r} but the state has subsystems {list(state_AB.labels)}")
    clash = set(dilation.env_labels) & set(state_AB.labels)
    if clash:
        raise InvalidParameterError(f"environment labels {sorted(clash)} clash with the state's subsystems")
    if state_AB.subsystem_dim(side) != dilation.system_dim:
        raise DimensionMismatchError(
            f"dilation acts on dimension {dilation.system_dim}, subsystem {side!r} has dimension {state_AB.subsystem_dim(side)}"
        )

    before = state_AB.tensor(dilation.env_state)
    n_system = len(state_AB.labels)
    targets = [state_AB.dims.index(side)] + list(range(n_system, n_system + len(dilation.env_labels)))
    evolved = apply_on_subsystems(before.matrix, before.dims.dims, [dilation.unitary], targets)
    after = DensityOperator(evolved, before.dims, before.tol)

    return ProcessOutcome(
        state_before=before,
        state_after=after,
        reduced_AB_before=state_AB,
        reduced_AB_after=partial_trace(after, state_AB.labels),
        reduced_E_before=dilation.env_state,
        reduced_E_after=partial_trace(after, dilation.env_labels),
        acted_on=side,
        system_labels=state_AB.labels,
        env_labels=dilation.env_labels,
    )


def _gibbs(hamiltonian: npt.ArrayLike, beta: float) -> tuple[np.ndarray, ComplexMatrix]:
    if not np.isfinite(beta) or beta < 0:
        raise InvalidParameterError(f"beta must be finite and >= 0, got {beta}")
    energies, vectors = hermitian_eigen(hamiltonian)
    if not np.all(np.isfinite(energies)):
        raise InvalidParameterError("Hamiltonian has non-finite entries")
    # shifting by the ground energy keeps exp() from overflowing
    weights = np.exp(-beta * (energies - energies.min()))
    return weights / weights.sum(), vectors


def thermal_state(hamiltonian: npt.ArrayLike, beta: float, label: str = "E") -> DensityOperator:
    """exp(-beta H) / Z."""
    weights, vectors = _gibbs(hamiltonian, beta)
    matrix = (vectors * weights) @ vectors.conj().T
    return DensityOperator(matrix, SubsystemDims.single(len(weights), label))


def thermalizing_channel(
    hamiltonian: npt.ArrayLike,
    beta: float,
    input_basis: npt.ArrayLike | None = None,
) -> KrausChannel:
    """Kraus family F_ln = sqrt(exp(-beta E_l) / Z) |l><psi_n|, flattened as l*d + n."""
    weights, vectors = _gibbs(hamiltonian, beta)
    d = len(weights)
    basis = np.eye(d) if input_basis is None else _orthonormal_columns(input_basis, "input_basis", d)
    if basis.shape[1] != d:
        raise InvalidParameterError(f"input_basis needs {d} vectors, got {basis.shape[1]}")
    ops = [np.sqrt(weights[l]) * np.outer(vectors[:, l], basis[:, n].conj()) for l in range(d) for n in range(d)]
    return KrausChannel(tuple(ops))


def thermalizing_dilation(
    hamiltonian: npt.ArrayLike,
    beta: float,
    input_basis: npt.ArrayLike | None = None,
    *,
    acts_on: str = "B",
) -> UnitaryDilation:
    """Dilation of the thermalizing channel on a d^2-dimensional environment indexed by (l, n)."""
    return stinespring_dilation(thermalizing_channel(hamiltonian, beta, input_basis), acts_on=acts_on)


def _hiding_distribution(p: npt.ArrayLike) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise InvalidParameterError("hiding distribution must be a non-empty vector")
    if not np.all(np.isfinite(p)) or np.any(p < -EIGEN_CLAMP):
        raise InvalidParameterError("hiding distribution must have finite, non-negative entries")
    if abs(float(p.sum()) - 1) > DEFAULT_TOL:
        raise InvalidParameterError(f"hiding distribution sums to {float(p.sum()):.12g}, expected 1")
    return np.clip(p, 0.0, None)


@log(include_result=False)
def bleaching_dilation(
    hiding_distribution: npt.ArrayLike,
    env_basis: npt.ArrayLike | None = None,
    *,
    system_dim: int | None = None,
    input_basis: npt.ArrayLike | None = None,
    acts_on: str = "B",
    env_label: str = "E",
) -> UnitaryDilation:
    """|b_j>_B |0>_E -> sum_k sqrt(p_k) |k>_B (x) (|j> |q_k>)_E.

    The environment is a j-register of the system dimension followed by a
    q-register spanned by ``env_basis`` columns (computational by default).
    Every input leaves B in sum_k p_k |k><k|.
    """
    p = _hiding_distribution(hiding_distribution)
    m = p.size
    d = m if system_dim is None else int(system_dim)
    if d < m:
        raise InvalidParameterError(f"system dimension {d} cannot hold {m} hiding outcomes")
    q_basis = np.eye(m) if env_basis is None else _orthonormal_columns(env_basis, "env_basis")
    if q_basis.shape[1] != m:
        raise InvalidParameterError(f"env_basis needs {m} vectors, got {q_basis.shape[1]}")
    q_dim = q_basis.shape[0]
    b_basis = np.eye(d) if input_basis is None else _orthonormal_columns(input_basis, "input_basis", d)
    if b_basis.shape[1] != d:
        raise InvalidParameterError(f"input_basis needs {d} vectors, got {b_basis.shape[1]}")

    env_dim = d * q_dim
    # row index b*env_dim + j*q_dim + q
    isometry = np.zeros((d, d, q_dim, d), dtype=np.complex128)
    for j in range(d):
        for k in range(m):
            isometry[k, j, :, j] += np.sqrt(p[k]) * q_basis[:, k]
    isometry = isometry.reshape(d * env_dim, d) @ b_basis.conj().T
    unitary = _complete_isometry(isometry, d, env_dim)
    return UnitaryDilation(unitary, env_dim, _pure_env_state(env_dim, env_label), acts_on)


def dephasing_measurement_channel(basis: Union[npt.ArrayLike, int]) -> KrausChannel:
    """Kraus {|i><i|} for the columns of ``basis``; an int means the computational basis."""
    if isinstance(basis, (int, np.integer)):
        basis = np.eye(int(basis))
    basis = _orthonormal_columns(basis, "basis")
    if basis.shape[0] != basis.shape[1]:
        raise InvalidParameterError(f"basis needs {basis.shape[0]} vectors, got {basis.shape[1]}")
    return KrausChannel(tuple(np.outer(basis[:, i], basis[:, i].conj()) for i in range(basis.shape[1])))


def swap_dilation(env_state: DensityOperator, *, acts_on: str = "B") -> UnitaryDilation:
    """Exchange of the system with an equally sized environment."""
    d = env_state.dim
    swap = np.zeros((d * d, d * d), dtype=np.complex128)
    for a in range(d):
        for b in range(d):
            swap[b * d + a, a * d + b] = 1
    return UnitaryDilation(swap, d, env_state, acts_on)


def purified_environment(dilation: UnitaryDilation, register_label: str = "R") -> UnitaryDilation:
    """Same process with the mixed environment purified into an extra register R.

    The environment becomes E (x) R in a pure state and the unitary U (x) I_R.
    """
    env = dilation.env_state
    if register_label in env.labels or register_label == dilation.acts_on:
        raise InvalidParameterError(f"register label {register_label!r} is already in use")
    # purify() puts the ancilla first; move it last
    purified = purify(env, register_label)
    amplitudes = purified.amplitudes.reshape(env.dim, env.dim).T.reshape(-1)
    dims = env.dims + SubsystemDims.single(env.dim, register_label)
    env_state = PureStateVector(amplitudes, dims, env.tol).to_density()
    unitary = np.kron(dilation.unitary, np.eye(env.dim))
    return UnitaryDilation(unitary, dilation.env_dim * env.dim, env_state, dilation.acts_on)


ChannelLike = Union[KrausChannel, UnitaryDilation]


def _operator_map(ch: ChannelLike):
    if isinstance(ch, UnitaryDilation):
        return ch.system_dim, ch.system_dim, ch.induced_matrix
    return ch.dim_in, ch.dim_out, ch.apply_matrix


def channels_equal(ch_a: ChannelLike, ch_b: ChannelLike, atol: float = DEFAULT_TOL) -> bool:
    """Compare two channels on every matrix unit |i><j| of the input space."""
    in_a, out_a, map_a = _operator_map(ch_a)
    in_b, out_b, map_b = _operator_map(ch_b)
    if (in_a, out_a) != (in_b, out_b):
        return False
    for i in range(in_a):
        for j in range(in_a):
            unit = np.zeros((in_a, in_a), dtype=np.complex128)
            unit[i, j] = 1
            if not matrices_close(map_a(unit), map_b(unit), atol):
                return False
    return True


def fixed_output_spread(dilation: UnitaryDilation, inputs: Sequence[DensityOperator]) -> float:
    """Largest trace distance between induced outputs of ``inputs``."""
    outputs = [dilation.induced_matrix(s.matrix) for s in inputs]
    spread = 0.0
    for i in range(len(outputs)):
        for j in range(i):
            spread = max(spread, 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(outputs[i] - outputs[j])))))
    return spread

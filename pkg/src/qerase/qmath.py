"""Dense complex linear algebra and quantum-state primitives.

Subsystem order in a ``SubsystemDims`` is the tensor-index order everywhere:
the leftmost label is the slowest index of the flattened matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import numpy.typing as npt

from .error_handling import DimensionMismatchError, InvalidParameterError, InvalidStateError

ComplexMatrix = npt.NDArray[np.complex128]

DEFAULT_TOL = 1e-9
# Eigenvalues at or below this magnitude count as exact zeros in entropies
EIGEN_CLAMP = 1e-12


def as_matrix(value: npt.ArrayLike) -> ComplexMatrix:
    """Return a read-only complex128 copy of ``value`` as a 2-D array."""
    matrix = np.array(value, dtype=np.complex128)
    if matrix.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-D matrix, got shape {matrix.shape}")
    matrix.setflags(write=False)
    return matrix


def matrices_close(a: npt.ArrayLike, b: npt.ArrayLike, atol: float) -> bool:
    """Entrywise equality within an explicit absolute tolerance."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        return False
    if a.size == 0:
        return True
    return bool(np.max(np.abs(a - b)) <= atol)


@dataclass(frozen=True)
class SubsystemDims:
    """Ordered local dimensions and unique labels of a composite system."""

    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        labels = tuple(str(label) for label in self.labels)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)
        if not dims:
            raise InvalidParameterError("a system needs at least one subsystem")
        if len(dims) != len(labels):
            raise InvalidParameterError(f"{len(dims)} dims given for {len(labels)} labels")
        if any(d < 1 for d in dims):
            raise InvalidParameterError(f"subsystem dimensions must be positive, got {dims}")
        if len(set(labels)) != len(labels):
            raise InvalidParameterError(f"subsystem labels must be unique, got {labels}")

    @classmethod
    def single(cls, dim: int, label: str) -> "SubsystemDims":
        return cls((dim,), (label,))

    @classmethod
    def bipartite(cls, dim_a: int, dim_b: int, labels: tuple[str, str] = ("A", "B")) -> "SubsystemDims":
        return cls((dim_a, dim_b), labels)

    @property
    def total(self) -> int:
        return math.prod(self.dims)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidParameterError(f"unknown subsystem label {label!r}; known labels are {list(self.labels)}") from None

    def dim(self, label: str) -> int:
        return self.dims[self.index(label)]

    def restrict(self, keep: Iterable[str]) -> "SubsystemDims":
        """Sub-signature for ``keep``, in this signature's order."""
        keep = set(keep)
        for label in keep:
            self.index(label)
        pairs = [(d, label) for d, label in zip(self.dims, self.labels) if label in keep]
        return SubsystemDims(tuple(d for d, _ in pairs), tuple(label for _, label in pairs))

    def __add__(self, other: "SubsystemDims") -> "SubsystemDims":
        return SubsystemDims(self.dims + other.dims, self.labels + other.labels)


def _hermitian_defect(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Positive, unit-trace Hermitian matrix with a subsystem signature.

    The stored matrix is the Hermitian part of the input, made read-only.
    """

    matrix: ComplexMatrix
    dims: SubsystemDims
    tol: float = DEFAULT_TOL

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise InvalidStateError(f"density matrix must be square, got shape {matrix.shape}")
        if matrix.shape[0] != self.dims.total:
            raise InvalidStateError(
                f"matrix dimension {matrix.shape[0]} does not match subsystem dims {self.dims.dims}"
            )
        if self.tol < 0:
            raise InvalidParameterError(f"tolerance must be non-negative, got {self.tol}")
        if not np.all(np.isfinite(matrix)):
            raise InvalidStateError("density matrix has non-finite entries")

        defect = _hermitian_defect(matrix)
        if defect > self.tol:
            raise InvalidStateError(f"density matrix is not Hermitian (max |M - M^dagger| = {defect:.3e})")
        matrix = (matrix + matrix.conj().T) / 2

        trace = complex(np.trace(matrix))
        if abs(trace - 1) > self.tol:
            raise InvalidStateError(f"density matrix trace is {trace.real:.12g}, expected 1")

        smallest = float(np.linalg.eigvalsh(matrix)[0])
        if smallest < -self.tol:
            raise InvalidStateError(f"density matrix is not positive semidefinite (min eigenvalue {smallest:.3e})")

        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_pure(cls, vector: npt.ArrayLike, dims: SubsystemDims, tol: float = DEFAULT_TOL) -> "DensityOperator":
        return PureStateVector(np.asarray(vector, dtype=np.complex128), dims, tol).to_density()

    @classmethod
    def maximally_mixed(cls, dims: SubsystemDims) -> "DensityOperator":
        return cls(np.eye(dims.total) / dims.total, dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def labels(self) -> tuple[str, ...]:
        return self.dims.labels

    def subsystem_dim(self, label: str) -> int:
        return self.dims.dim(label)

    def eigenvalues(self) -> np.ndarray:
        """Real eigenvalues, descending."""
        return np.linalg.eigvalsh(self.matrix)[::-1]

    def tensor(self, other: "DensityOperator") -> "DensityOperator":
        return DensityOperator(tensor_product(self.matrix, other.matrix), self.dims + other.dims, max(self.tol, other.tol))

    def is_pure(self, atol: float = 1e-9) -> bool:
        return abs(float(np.real(np.trace(self.matrix @ self.matrix))) - 1) <= atol

    def close_to(self, other: "DensityOperator", atol: float) -> bool:
        return self.dims.dims == other.dims.dims and matrices_close(self.matrix, other.matrix, atol)


@dataclass(frozen=True, eq=False)
class PureStateVector:
    """Unit-norm state vector with a subsystem signature."""

    amplitudes: npt.NDArray[np.complex128]
    dims: SubsystemDims
    tol: float = DEFAULT_TOL

    def __post_init__(self) -> None:
        amplitudes = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amplitudes.shape[0] != self.dims.total:
            raise InvalidStateError(f"vector length {amplitudes.shape[0]} does not match subsystem dims {self.dims.dims}")
        norm = float(np.linalg.norm(amplitudes))
        if abs(norm - 1) > self.tol:
            raise InvalidStateError(f"state vector norm is {norm:.12g}, expected 1")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    def to_density(self) -> DensityOperator:
        return DensityOperator(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims, self.tol)


def tensor_product(a: npt.ArrayLike, b: npt.ArrayLike) -> ComplexMatrix:
    """Kronecker product; the left factor is the slow index."""
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def permute_subsystems(matrix: npt.ArrayLike, dims: Sequence[int], order: Sequence[int]) -> ComplexMatrix:
    """Reorder the tensor factors of an operator; ``order[k]`` is the old position of new factor ``k``."""
    matrix = np.asarray(matrix)
    n = len(dims)
    if sorted(order) != list(range(n)):
        raise InvalidParameterError(f"{list(order)} is not a permutation of {n} subsystems")
    total = math.prod(dims)
    tensor = matrix.reshape(tuple(dims) * 2)
    axes = list(order) + [n + i for i in order]
    return tensor.transpose(axes).reshape(total, total)


def apply_on_subsystems(
    matrix: npt.ArrayLike,
    dims: Sequence[int],
    ops: Sequence[npt.ArrayLike],
    targets: Sequence[int],
) -> ComplexMatrix:
    """Compute sum_k (I (x) K_k) M (I (x) K_k)^dagger with each K_k acting on ``targets``.

    ``targets`` lists subsystem positions in the order the operators' own
    tensor factors are written.
    """
    dims = list(dims)
    targets = list(targets)
    if len(set(targets)) != len(targets) or any(t < 0 or t >= len(dims) for t in targets):
        raise InvalidParameterError(f"invalid target subsystems {targets} for {len(dims)} subsystems")
    target_dim = math.prod(dims[t] for t in targets)
    others = [i for i in range(len(dims)) if i not in targets]
    order = others + targets
    rest_dim = math.prod(dims[i] for i in others)

    permuted = permute_subsystems(matrix, dims, order)
    identity = np.eye(rest_dim)
    result = np.zeros_like(permuted, dtype=np.complex128)
    for op in ops:
        op = np.asarray(op, dtype=np.complex128)
        if op.shape != (target_dim, target_dim):
            raise DimensionMismatchError(f"operator shape {op.shape} does not act on a {target_dim}-dimensional factor")
        full = np.kron(identity, op)
        result += full @ permuted @ full.conj().T

    inverse = list(np.argsort(order))
    return permute_subsystems(result, [dims[i] for i in order], inverse)


def partial_trace(state: DensityOperator, keep: Iterable[str] | str) -> DensityOperator:
    """Trace out every subsystem not in ``keep``; kept factors stay in their original order."""
    if isinstance(keep, str):
        keep = {keep}
    keep = set(keep)
    labels = state.dims.labels
    if not keep:
        raise InvalidParameterError("partial_trace needs at least one subsystem to keep")
    unknown = keep - set(labels)
    if unknown:
        raise InvalidParameterError(f"unknown subsystem labels {sorted(unknown)}; known labels are {list(labels)}")
    if keep == set(labels):
        raise InvalidParameterError("partial_trace asked to keep every subsystem; nothing to trace out")

    dims = state.dims.dims
    keep_idx = [i for i, label in enumerate(labels) if label in keep]
    drop_idx = [i for i, label in enumerate(labels) if label not in keep]
    kept_dim = math.prod(dims[i] for i in keep_idx)
    dropped_dim = math.prod(dims[i] for i in drop_idx)

    permuted = permute_subsystems(state.matrix, dims, keep_idx + drop_idx)
    reduced = np.trace(permuted.reshape(kept_dim, dropped_dim, kept_dim, dropped_dim), axis1=1, axis2=3)
    return DensityOperator(reduced, state.dims.restrict(keep), state.tol)


def hermitian_eigen(m: npt.ArrayLike, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, ComplexMatrix]:
    """Eigenvalues (descending) and matching orthonormal eigenvector columns."""
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
    defect = _hermitian_defect(m)
    if defect > tol:
        raise InvalidParameterError(f"matrix is not Hermitian (max |M - M^dagger| = {defect:.3e})")
    values, vectors = np.linalg.eigh((m + m.conj().T) / 2)
    return values[::-1].copy(), vectors[:, ::-1].copy()


def xlog2x(values: npt.ArrayLike) -> np.ndarray:
    """Elementwise x*log2(x) with entries at or below the clamp treated as 0."""
    values = np.asarray(values, dtype=float)
    safe = np.where(values > EIGEN_CLAMP, values, 1.0)
    return np.where(values > EIGEN_CLAMP, values * np.log2(safe), 0.0)


def shannon_entropy(probabilities: npt.ArrayLike) -> float:
    """-sum p log2 p in bits."""
    return float(-np.sum(xlog2x(probabilities))) + 0.0


def von_neumann_entropy(state: DensityOperator) -> float:
    """S(rho) = -Tr rho log2 rho, in bits."""
    return shannon_entropy(np.linalg.eigvalsh(state.matrix))


def quantum_relative_entropy(a: DensityOperator, b: DensityOperator) -> float:
    """S(a||b) = Tr a (log2 a - log2 b) in bits; ``inf`` when supp(a) is not inside supp(b)."""
    if a.dims.dims != b.dims.dims:
        raise DimensionMismatchError(f"relative entropy of states with dims {a.dims.dims} and {b.dims.dims}")
    mu, w = np.linalg.eigh(b.matrix)
    overlaps = np.real(np.einsum("ik,ij,jk->k", w.conj(), a.matrix, w))
    outside = (mu <= EIGEN_CLAMP) & (overlaps > EIGEN_CLAMP)
    if np.any(outside):
        return math.inf
    cross = float(np.sum(np.where(mu > EIGEN_CLAMP, overlaps * np.log2(np.where(mu > EIGEN_CLAMP, mu, 1.0)), 0.0)))
    return max(0.0, -von_neumann_entropy(a) - cross)


def purify(state: DensityOperator, ancilla_label: str) -> PureStateVector:
    """Purification sum_j sqrt(l_j) |j>_anc |v_j> with the ancilla as the leftmost factor.

    The ancilla has the full input dimension; directions beyond the rank carry zero weight.
    """
    if ancilla_label in state.labels:
        raise InvalidParameterError(f"ancilla label {ancilla_label!r} already names a subsystem")
    values, vectors = np.linalg.eigh(state.matrix)
    weights = np.sqrt(np.clip(values, 0.0, None))
    amplitudes = (vectors * weights).T.reshape(-1)
    amplitudes = amplitudes / np.linalg.norm(amplitudes)
    dims = SubsystemDims.single(state.dim, ancilla_label) + state.dims
    return PureStateVector(amplitudes, dims, state.tol)


def trace_distance(a: DensityOperator, b: DensityOperator) -> float:
    """(1/2) * sum |eig(a - b)|."""
    if a.dims.dims != b.dims.dims:
        raise DimensionMismatchError(f"trace distance between states with dims {a.dims.dims} and {b.dims.dims}")
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(a.matrix - b.matrix))))

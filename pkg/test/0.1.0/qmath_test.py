import math

import numpy as np
import pytest

from qerase.ensembles import haar_random_unitary, random_density_matrix
from qerase.error_handling import DimensionMismatchError, InvalidParameterError, InvalidStateError
from qerase.qmath import (
    DensityOperator,
    PureStateVector,
    SubsystemDims,
    apply_on_subsystems,
    hermitian_eigen,
    partial_trace,
    purify,
    quantum_relative_entropy,
    tensor_product,
    trace_distance,
    von_neumann_entropy,
)

AB = SubsystemDims.bipartite(2, 2)
QUBIT_A = SubsystemDims.single(2, "A")


def bell() -> DensityOperator:
    return DensityOperator.from_pure(np.array([1, 0, 0, 1]) / math.sqrt(2), AB)


def diag(*values: float, label: str = "A") -> DensityOperator:
    return DensityOperator(np.diag(values), SubsystemDims.single(len(values), label))


# --- tensor products and partial traces ---

def test_tensor_product_of_identities():
    """Test that I2 (x) I2 is I4."""
    np.testing.assert_array_equal(tensor_product(np.eye(2), np.eye(2)), np.eye(4))


def test_tensor_product_left_factor_is_slow_index():
    """Test that diag(1,0) (x) diag(0,1) puts the weight on |01>."""
    result = tensor_product(np.diag([1, 0]), np.diag([0, 1]))
    np.testing.assert_array_equal(result, np.diag([0, 1, 0, 0]))


def test_tensor_product_trace_is_multiplicative():
    """Test that Tr(rho (x) sigma) = Tr(rho) Tr(sigma)."""
    rng = np.random.default_rng(3)
    a = rng.standard_normal((2, 2))
    b = rng.standard_normal((2, 2))
    assert np.trace(tensor_product(a, b)) == pytest.approx(np.trace(a) * np.trace(b))


def test_partial_trace_of_bell_state_is_maximally_mixed():
    """Test that either marginal of a Bell state is I/2."""
    reduced = partial_trace(bell(), {"A"})
    assert reduced.labels == ("A",)
    np.testing.assert_allclose(reduced.matrix, np.eye(2) / 2, atol=1e-12)


def test_partial_trace_of_product_state_returns_factor():
    """Test that tracing B out of rho (x) sigma gives rho."""
    rng = np.random.default_rng(11)
    rho = random_density_matrix(2, None, rng, SubsystemDims.single(2, "A"))
    sigma = random_density_matrix(2, None, rng, SubsystemDims.single(2, "B"))
    reduced = partial_trace(rho.tensor(sigma), "A")
    np.testing.assert_allclose(reduced.matrix, rho.matrix, atol=1e-12)


def test_partial_trace_of_three_party_state_is_valid():
    """Test that keeping two of three subsystems yields a valid state in the original order."""
    rng = np.random.default_rng(5)
    dims = SubsystemDims((2, 2, 2), ("A", "B", "C"))
    state = random_density_matrix(8, None, rng, dims)
    reduced = partial_trace(state, {"B", "A"})
    assert reduced.labels == ("A", "B")
    assert np.trace(reduced.matrix).real == pytest.approx(1.0, abs=1e-12)
    assert reduced.eigenvalues()[-1] >= -1e-12


def test_partial_trace_rejects_keeping_everything():
    """Test that a no-op partial trace is refused."""
    with pytest.raises(InvalidParameterError):
        partial_trace(bell(), {"A", "B"})


def test_partial_trace_rejects_unknown_label():
    """Test that an unknown subsystem label is refused."""
    with pytest.raises(InvalidParameterError):
        partial_trace(bell(), {"C"})


def test_apply_on_subsystems_flips_second_qubit():
    """Test that X acting on B maps |00><00| to |01><01|."""
    x = np.array([[0, 1], [1, 0]])
    ket00 = np.diag([1, 0, 0, 0]).astype(complex)
    result = apply_on_subsystems(ket00, [2, 2], [x], [1])
    np.testing.assert_array_equal(result, np.diag([0, 1, 0, 0]))


# --- eigendecomposition and entropies ---

def test_hermitian_eigen_sorts_descending():
    """Test that a diagonal matrix's eigenvalues come back in descending order."""
    values, _ = hermitian_eigen(np.diag([0.25, 0.75]))
    np.testing.assert_allclose(values, [0.75, 0.25])


def test_hermitian_eigen_pauli_x():
    """Test that Pauli-X has eigenvalues 1 and -1."""
    values, _ = hermitian_eigen(np.array([[0, 1], [1, 0]]))
    np.testing.assert_allclose(values, [1.0, -1.0], atol=1e-14)


def test_hermitian_eigen_reconstructs_matrix():
    """Test that V diag(l) V^dagger reproduces a random Hermitian matrix."""
    rng = np.random.default_rng(2)
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    m = g + g.conj().T
    values, vectors = hermitian_eigen(m)
    assert np.max(np.abs(vectors @ np.diag(values) @ vectors.conj().T - m)) <= 1e-10
    np.testing.assert_allclose(vectors.conj().T @ vectors, np.eye(4), atol=1e-12)


def test_hermitian_eigen_rejects_non_hermitian():
    """Test that a non-Hermitian matrix is refused."""
    with pytest.raises(InvalidParameterError):
        hermitian_eigen(np.array([[0, 1], [0, 0]]))


def test_entropy_of_pure_state_is_zero():
    """Test that a pure state has zero entropy."""
    assert von_neumann_entropy(bell()) == pytest.approx(0.0, abs=1e-12)


def test_entropy_of_maximally_mixed_qubit_is_one_bit():
    """Test that I/2 carries one bit."""
    assert von_neumann_entropy(DensityOperator.maximally_mixed(QUBIT_A)) == pytest.approx(1.0)


def test_entropy_matches_shannon_formula():
    """Test that diag(3/4, 1/4) has entropy -sum p log2 p."""
    assert von_neumann_entropy(diag(0.75, 0.25)) == pytest.approx(0.8112781244591328, abs=1e-12)


def test_entropy_is_basis_invariant():
    """Test that S(U rho U^dagger) = S(rho) for random unitaries."""
    rng = np.random.default_rng(17)
    dims = SubsystemDims.single(4, "S")
    for _ in range(5):
        rho = random_density_matrix(4, None, rng, dims)
        u = haar_random_unitary(4, rng)
        rotated = DensityOperator(u @ rho.matrix @ u.conj().T, dims)
        assert abs(von_neumann_entropy(rotated) - von_neumann_entropy(rho)) <= 1e-10


def test_entropy_is_subadditive():
    """Test that S(AB) <= S(A) + S(B) on random bipartite states."""
    rng = np.random.default_rng(23)
    for rank in (1, 2, 4):
        state = random_density_matrix(4, rank, rng, AB)
        s_a = von_neumann_entropy(partial_trace(state, "A"))
        s_b = von_neumann_entropy(partial_trace(state, "B"))
        assert von_neumann_entropy(state) <= s_a + s_b + 1e-9


def test_relative_entropy_values():
    """Test that S(rho||rho) = 0, S(|0><0| || I/2) = 1 and disjoint supports give inf."""
    zero = diag(1.0, 0.0)
    one = diag(0.0, 1.0)
    mixed = DensityOperator.maximally_mixed(QUBIT_A)
    assert quantum_relative_entropy(mixed, mixed) == pytest.approx(0.0, abs=1e-12)
    assert quantum_relative_entropy(zero, mixed) == pytest.approx(1.0)
    assert quantum_relative_entropy(zero, one) == math.inf


# --- purification and distances ---

def test_purify_maximally_mixed_gives_maximally_entangled_vector():
    """Test that purifying I/2 gives Schmidt coefficients sqrt(1/2) with the ancilla first."""
    purified = purify(DensityOperator.maximally_mixed(SubsystemDims.single(2, "B")), "A")
    assert purified.dims.labels == ("A", "B")
    singular = np.linalg.svd(purified.amplitudes.reshape(2, 2), compute_uv=False)
    np.testing.assert_allclose(singular, [math.sqrt(0.5)] * 2, atol=1e-12)


def test_purify_then_trace_returns_input():
    """Test that tracing the ancilla out of a purification recovers the state."""
    rng = np.random.default_rng(29)
    for _ in range(5):
        rho = random_density_matrix(2, None, rng, SubsystemDims.single(2, "B"))
        reduced = partial_trace(purify(rho, "R").to_density(), "B")
        assert np.max(np.abs(reduced.matrix - rho.matrix)) <= 1e-10


def test_purify_rejects_taken_label():
    """Test that the ancilla label must be new."""
    with pytest.raises(InvalidParameterError):
        purify(bell(), "A")


def test_trace_distance_values():
    """Test that identical states are at distance 0 and orthogonal pure states at distance 1."""
    rho = diag(0.75, 0.25)
    assert trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-15)
    assert trace_distance(diag(1.0, 0.0), diag(0.0, 1.0)) == pytest.approx(1.0)


def test_trace_distance_rejects_dimension_mismatch():
    """Test that states of different dimensions cannot be compared."""
    with pytest.raises(DimensionMismatchError):
        trace_distance(diag(1.0, 0.0), diag(1.0, 0.0, 0.0))



def test_close_to_compares_matrices_and_dimensions():
    """Test that close_to ignores labels, honours atol and never matches other dimensions."""
    rho = diag(0.75, 0.25)
    assert rho.close_to(diag(0.75 + 1e-12, 0.25 - 1e-12, label="E"), 1e-9)
    assert not rho.close_to(diag(0.7, 0.3), 1e-9)
    assert rho.close_to(diag(0.7, 0.3), 0.1)
    assert not diag(1.0, 0.0).close_to(diag(1.0, 0.0, 0.0), 1.0)


# --- validation ---

@pytest.mark.parametrize(
    "matrix",
    [
        [[0.5, 0.5], [0.0, 0.5]],
        [[1.0, 0.0], [0.0, 1.0]],
        [[1.5, 0.0], [0.0, -0.5]],
    ],
    ids=["non-hermitian", "trace-two", "negative-eigenvalue"],
)
def test_density_operator_rejects_invalid_matrices(matrix):
    """Test that each invariant violation raises InvalidStateError."""
    with pytest.raises(InvalidStateError):
        DensityOperator(np.array(matrix), QUBIT_A)


def test_density_operator_is_read_only():
    """Test that the stored matrix cannot be mutated."""
    rho = diag(0.5, 0.5)
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1.0


def test_pure_state_vector_requires_unit_norm():
    """Test that an unnormalized vector is refused."""
    with pytest.raises(InvalidStateError):
        PureStateVector(np.array([1.0, 1.0]), QUBIT_A)


def test_subsystem_dims_rejects_duplicate_labels():
    """Test that labels must be unique."""
    with pytest.raises(InvalidParameterError):
        SubsystemDims((2, 2), ("A", "A"))

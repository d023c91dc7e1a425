import math

import numpy as np
import pytest

from qerase.channels import (
    KrausChannel,
    apply_channel,
    apply_local_channel,
    bleaching_dilation,
    channels_equal,
    dephasing_measurement_channel,
    fixed_output_spread,
    purified_environment,
    run_process,
    stinespring_dilation,
    swap_dilation,
    thermal_state,
    thermalizing_channel,
    thermalizing_dilation,
)
from qerase.ensembles import random_density_matrix, random_kraus_channel, trial_rng
from qerase.error_handling import DimensionMismatchError, InvalidParameterError
from qerase.qmath import DensityOperator, SubsystemDims, partial_trace, trace_distance, von_neumann_entropy

AB = SubsystemDims.bipartite(2, 2)
QUBIT_B = SubsystemDims.single(2, "B")
PAULIS = (
    np.eye(2),
    np.array([[0, 1], [1, 0]]),
    np.array([[0, -1j], [1j, 0]]),
    np.array([[1, 0], [0, -1]]),
)


def bell() -> DensityOperator:
    return DensityOperator.from_pure(np.array([1, 0, 0, 1]) / math.sqrt(2), AB)


def depolarizing(p: float) -> KrausChannel:
    weights = [1 - 3 * p / 4, p / 4, p / 4, p / 4]
    return KrausChannel(tuple(math.sqrt(w) * s for w, s in zip(weights, PAULIS)))


def random_inputs(count: int, seed: int = 0) -> list[DensityOperator]:
    rng = trial_rng(seed, 0)
    return [random_density_matrix(2, None, rng, QUBIT_B) for _ in range(count)]


# --- Kraus channels ---

def test_kraus_channel_requires_trace_preservation():
    """Test that operators with sum K^dagger K != I are refused."""
    with pytest.raises(InvalidParameterError):
        KrausChannel((np.eye(2), np.eye(2)))


def test_kraus_channel_requires_matching_shapes():
    """Test that Kraus operators of different shapes are refused."""
    with pytest.raises(DimensionMismatchError):
        KrausChannel((np.eye(2), np.eye(3)))


def test_identity_channel_leaves_state_unchanged():
    """Test that the identity channel is a no-op."""
    rho = random_inputs(1)[0]
    out = apply_channel(KrausChannel.identity(2), rho)
    np.testing.assert_allclose(out.matrix, rho.matrix, atol=1e-15)


def test_depolarizing_channel_on_ground_state():
    """Test that depolarizing |0><0| with strength p gives diag(1 - p/2, p/2)."""
    ground = DensityOperator(np.diag([1.0, 0.0]), QUBIT_B)
    out = apply_channel(depolarizing(0.3), ground)
    np.testing.assert_allclose(out.matrix, np.diag([0.85, 0.15]), atol=1e-12)


def test_local_dephasing_of_bell_state_is_classical_mixture():
    """Test that dephasing B of a Bell state leaves (|00><00| + |11><11|)/2."""
    out = apply_local_channel(dephasing_measurement_channel(2), bell(), "B")
    np.testing.assert_allclose(out.matrix, np.diag([0.5, 0, 0, 0.5]), atol=1e-12)


def test_dephasing_channel_rejects_non_orthonormal_basis():
    """Test that a non-orthonormal measurement basis is refused."""
    with pytest.raises(InvalidParameterError):
        dephasing_measurement_channel(np.array([[1, 1], [0, 1]]))


# --- dilations ---

def test_stinespring_dilation_reproduces_random_channels():
    """Test that the dilation's induced channel equals the Kraus channel on every matrix unit."""
    rng = trial_rng(4, 0)
    for count in (1, 2, 3, 4):
        channel = random_kraus_channel(2, count, rng)
        dilation = stinespring_dilation(channel)
        assert dilation.env_dim == count
        assert channels_equal(channel, dilation, 1e-9)
        assert channels_equal(channel, dilation.to_kraus(), 1e-9)


def test_stinespring_dilation_pads_larger_environment():
    """Test that a larger environment than the Kraus count still dilates the same channel."""
    channel = depolarizing(0.5)
    dilation = stinespring_dilation(channel, env_dim=6)
    assert dilation.env_dim == 6
    assert channels_equal(channel, dilation, 1e-9)


def test_stinespring_dilation_rejects_small_environment():
    """Test that the environment must hold every Kraus operator."""
    with pytest.raises(InvalidParameterError):
        stinespring_dilation(depolarizing(0.5), env_dim=2)


def test_channels_equal_detects_different_channels():
    """Test that the identity and a depolarizing channel are told apart."""
    assert not channels_equal(KrausChannel.identity(2), depolarizing(0.2), 1e-9)


def test_run_process_with_identity_dilation_changes_nothing():
    """Test that the identity channel leaves AB and the environment untouched."""
    outcome = run_process(bell(), stinespring_dilation(KrausChannel.identity(2)))
    np.testing.assert_allclose(outcome.reduced_AB_after.matrix, bell().matrix, atol=1e-12)
    assert outcome.env_labels == ("E",)
    assert outcome.entropy_drift <= 1e-9


def test_run_process_keeps_global_pure_state_pure():
    """Test that unitary evolution of a pure global state stays pure."""
    rng = trial_rng(8, 0)
    dilation = stinespring_dilation(random_kraus_channel(2, 3, rng))
    outcome = run_process(bell(), dilation)
    assert von_neumann_entropy(outcome.state_after) <= 1e-9
    assert outcome.state_after.labels == ("A", "B", "E")


def test_run_process_rejects_unknown_side():
    """Test that a dilation acting on a missing subsystem is refused."""
    dilation = stinespring_dilation(KrausChannel.identity(2), acts_on="C")
    with pytest.raises(InvalidParameterError):
        run_process(bell(), dilation)


# --- thermalization ---

def test_thermal_state_at_beta_ln2():
    """Test that H = diag(0, 1) at beta = ln 2 gives diag(2/3, 1/3)."""
    rho = thermal_state(np.diag([0.0, 1.0]), math.log(2))
    np.testing.assert_allclose(rho.matrix, np.diag([2 / 3, 1 / 3]), atol=1e-12)


def test_thermal_state_rejects_negative_beta():
    """Test that beta must be non-negative."""
    with pytest.raises(InvalidParameterError):
        thermal_state(np.diag([0.0, 1.0]), -1.0)


def test_thermalizing_dilation_outputs_gibbs_state():
    """Test that every input leaves the Gibbs state and the dilation matches its Kraus family."""
    hamiltonian = np.diag([0.0, 1.0])
    beta = math.log(2)
    gibbs = thermal_state(hamiltonian, beta, label="B")
    dilation = thermalizing_dilation(hamiltonian, beta)
    assert dilation.env_dim == 4
    for rho in random_inputs(10, seed=3):
        assert trace_distance(dilation.induced_channel(rho), gibbs) <= 1e-10
    assert channels_equal(thermalizing_channel(hamiltonian, beta), dilation, 1e-9)


def test_thermalizing_channel_with_rotated_input_basis():
    """Test that the input basis does not change the output of the thermalizing channel."""
    hadamard = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    channel = thermalizing_channel(np.diag([0.0, 1.0]), 0.0, hadamard)
    out = apply_channel(channel, random_inputs(1)[0])
    np.testing.assert_allclose(out.matrix, np.eye(2) / 2, atol=1e-12)


def test_thermalizing_channel_is_idempotent():
    """Test that thermalizing twice equals thermalizing once, and both give the Gibbs state."""
    hamiltonian = np.diag([0.0, 0.7, 1.9])
    ch = thermalizing_channel(hamiltonian, 1.3)
    gibbs = thermal_state(hamiltonian, 1.3, label="B")
    rng = trial_rng(4, 0)
    for rank in (1, 2, 3):
        state = random_density_matrix(3, rank, rng, SubsystemDims.single(3, "B"))
        once = apply_channel(ch, state)
        twice = apply_channel(ch, once)
        assert trace_distance(once, twice) <= 1e-10
        assert trace_distance(once, gibbs) <= 1e-10


# --- bleaching ---

def test_bleaching_dilation_has_fixed_output():
    """Test that bleaching maps every input to sum_k p_k |k><k|."""
    dilation = bleaching_dilation([0.3, 0.7])
    assert dilation.env_dim == 4
    inputs = random_inputs(5, seed=9)
    assert fixed_output_spread(dilation, inputs) <= 1e-10
    np.testing.assert_allclose(dilation.induced_matrix(inputs[0].matrix), np.diag([0.3, 0.7]), atol=1e-12)


def test_bleaching_moves_bell_correlations_into_environment():
    """Test that bleaching B of a Bell state leaves A B' in a product state."""
    outcome = run_process(bell(), bleaching_dilation([0.5, 0.5]))
    np.testing.assert_allclose(outcome.reduced_AB_after.matrix, np.eye(4) / 4, atol=1e-12)
    assert von_neumann_entropy(outcome.reduced_E_after) == pytest.approx(2.0, abs=1e-9)


def test_bleaching_dilation_with_rotated_environment_basis():
    """Test that a non-computational environment basis still bleaches."""
    rotation = np.array([[1, 1j], [1j, 1]]) / math.sqrt(2)
    dilation = bleaching_dilation([0.5, 0.5], rotation)
    assert fixed_output_spread(dilation, random_inputs(5, seed=1)) <= 1e-10


def test_bleaching_dilation_rejects_bad_distribution():
    """Test that the hiding distribution must sum to one."""
    with pytest.raises(InvalidParameterError):
        bleaching_dilation([0.7, 0.7])


# --- swap and purified environments ---

def test_swap_dilation_outputs_bath_state():
    """Test that swapping with a bath leaves the system in the bath state."""
    bath = thermal_state(np.diag([0.0, 1.0]), 1.0)
    dilation = swap_dilation(bath)
    for rho in random_inputs(3):
        np.testing.assert_allclose(dilation.induced_matrix(rho.matrix), bath.matrix, atol=1e-12)
        np.testing.assert_allclose(dilation.environment_output(rho).matrix, rho.matrix, atol=1e-12)


def test_purified_environment_keeps_the_channel():
    """Test that purifying a thermal bath into R leaves the induced channel unchanged."""
    dilation = swap_dilation(thermal_state(np.diag([0.0, 1.0]), 1.0))
    purified = purified_environment(dilation)
    assert purified.env_labels == ("E", "R")
    assert purified.env_state.is_pure()
    np.testing.assert_allclose(partial_trace(purified.env_state, "E").matrix, dilation.env_state.matrix, atol=1e-12)
    assert channels_equal(dilation, purified, 1e-9)


def test_purified_environment_rejects_taken_label():
    """Test that the purifying register needs a fresh label."""
    dilation = swap_dilation(thermal_state(np.diag([0.0, 1.0]), 1.0))
    with pytest.raises(InvalidParameterError):
        purified_environment(dilation, register_label="B")

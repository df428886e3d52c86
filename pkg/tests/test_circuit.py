import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqent import linalg
from seqent.circuit import (
    MeasurementStep,
    Scenario,
    UnsupportedError,
    complementary_channel,
    conditional_states_given_device,
    controlled_shift,
    locc_undo_last,
    measurement_isometry,
    measurement_unitary,
    random_pauli_channel,
    scenario_from_bases,
    simulate,
    system_channel,
    undo_branches,
    undo_kraus,
)
from seqent.entropy import von_neumann
from seqent.linalg import DimensionCapError
from seqent.qstate import (
    basis_state,
    make_basis,
    maximally_mixed,
    pure_state,
    random_density,
    random_pure,
)

from oracles import premeasurement_state, two_step_quadruple_sum

X2, Z2 = make_basis("standard", 2), make_basis("fourier", 2)


def test_standard_measurement_is_cnot():
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    np.testing.assert_allclose(measurement_unitary(X2, 0, 1), cnot, atol=1e-15)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_measurement_unitary_is_unitary_and_copies(d):
    b = make_basis("haar", d, d + 10)
    u = measurement_unitary(b, 1, 2)
    assert linalg.is_unitary(u, 1e-12)
    cs = controlled_shift(b)
    for j in range(d):
        zero, out = np.zeros(d), np.zeros(d)
        zero[0], out[j] = 1, 1
        np.testing.assert_allclose(cs @ np.kron(b.ket(j), zero), np.kron(b.ket(j), out), atol=1e-12)
    with pytest.raises(ValueError):
        measurement_unitary(b, 2, 2)


def test_dimension_cap():
    with pytest.raises(DimensionCapError):
        Scenario(maximally_mixed(4), tuple(MeasurementStep(make_basis("standard", 4)) for _ in range(6)))


def test_shared_eigenstate_gives_product():
    traj = simulate(scenario_from_bases(basis_state(2), [X2, X2]))
    e = np.zeros(8)
    e[0] = 1
    np.testing.assert_allclose(traj.final.op, np.outer(e, e), atol=1e-15)


def test_mub_pair_maximally_entangles_system():
    traj = simulate(scenario_from_bases(basis_state(2), [X2, Z2]))
    assert traj.final.purity() == pytest.approx(1.0)
    np.testing.assert_allclose(traj.final.marginal(["S"]).op, np.eye(2) / 2, atol=1e-15)


def test_rotation_pi_over_6_hand_evolution():
    z = make_basis("rotation", 2, np.pi / 6)
    traj = simulate(scenario_from_bases(basis_state(2), [X2, z]))
    # |0> -> |0>|0> -> sum_k <Z_k|0> |Z_k>|0>|k>, amplitudes cos(pi/6), -sin(pi/6)
    c, s = np.cos(np.pi / 6), np.sin(np.pi / 6)
    psi = c * np.kron(z.ket(0), [1, 0, 0, 0]) - s * np.kron(z.ket(1), [0, 1, 0, 0])
    np.testing.assert_allclose(traj.final.op, np.outer(psi, psi.conj()), atol=1e-15)
    np.testing.assert_allclose(np.linalg.eigvalsh(traj.final.marginal(["S"]).op), [0.25, 0.75], atol=1e-15)


@settings(max_examples=25, deadline=None)
@given(d=st.integers(2, 4), seed=st.integers(0, 10**6))
def test_two_steps_match_quadruple_sum(d, seed):
    rho0 = random_density(d, d, seed)
    x, z = make_basis("haar", d, seed + 1), make_basis("haar", d, seed + 2)
    traj = simulate(scenario_from_bases(rho0, [x, z]))
    np.testing.assert_allclose(traj.final.op, two_step_quadruple_sum(rho0.op, x.vectors, z.vectors), atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(d=st.integers(2, 3), n=st.integers(1, 4), seed=st.integers(0, 10**6))
def test_n_steps_match_outcome_sum(d, n, seed):
    rho0 = random_density(d, 2, seed)
    bases = [make_basis("haar", d, seed + k) for k in range(n)]
    traj = simulate(scenario_from_bases(rho0, bases))
    np.testing.assert_allclose(traj.final.op, premeasurement_state(rho0.op, [b.vectors for b in bases]), atol=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_fourier_form_of_isometry(d):
    b = make_basis("haar", d, 17 * d)
    direct = measurement_isometry(b, "direct")
    fourier = measurement_isometry(b, "fourier")
    np.testing.assert_allclose(direct, fourier, atol=1e-12)
    np.testing.assert_allclose(direct.conj().T @ direct, np.eye(d), atol=1e-12)
    rho0 = random_density(d, d, d)
    traj = simulate(scenario_from_bases(rho0, [b]))
    np.testing.assert_allclose(fourier @ rho0.op @ fourier.conj().T, traj.final.op, atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(d=st.integers(2, 3), seed=st.integers(0, 10**6))
def test_pure_inputs_stay_pure(d, seed):
    bases = [make_basis("haar", d, seed + k) for k in range(3)]
    traj = simulate(scenario_from_bases(random_pure(d, seed), bases))
    for state in traj.states:
        assert state.purity() == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=15, deadline=None)
@given(d=st.integers(2, 3), seed=st.integers(0, 10**6))
def test_reference_is_never_disturbed(d, seed):
    bases = [make_basis("haar", d, seed + k) for k in range(3)]
    traj = simulate(scenario_from_bases(random_density(d, d, seed), bases, track_reference=True))
    ref0 = traj.states[0].marginal(["Sp"]).op
    for state in traj.states:
        assert state.labels[-1] == "Sp"
        np.testing.assert_allclose(state.marginal(["Sp"]).op, ref0, atol=1e-12)


def test_mixed_devices_decompose_into_shifted_records():
    d = 3
    rho0 = random_density(d, 2, 1)
    x, z = make_basis("haar", d, 2), make_basis("haar", d, 3)
    alpha = np.array([0.5, 0.3, 0.2])
    beta = np.array([0.1, 0.6, 0.3])
    traj = simulate(scenario_from_bases(rho0, [x, z], devices=[alpha, beta]))
    pure = two_step_quadruple_sum(rho0.op, x.vectors, z.vectors)
    sh = np.roll(np.eye(d), 1, axis=0)
    expected = np.zeros_like(pure)
    for q, r in itertools.product(range(d), repeat=2):
        # device initially in |q>, |r>: records shifted by q and r
        u = np.kron(np.eye(d), np.kron(np.linalg.matrix_power(sh, q), np.linalg.matrix_power(sh, r)))
        expected += alpha[q] * beta[r] * u @ pure @ u.conj().T
    np.testing.assert_allclose(traj.final.op, expected, atol=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_system_channel_mub_is_fully_depolarizing(d):
    x, z = make_basis("standard", d), make_basis("fourier", d)
    traj = simulate(scenario_from_bases(random_density(d, d, 5), [x, z]))
    reduced, predicted = system_channel(traj)
    np.testing.assert_allclose(reduced, np.eye(d) / d, atol=1e-12)
    np.testing.assert_allclose(predicted, np.eye(d) / d, atol=1e-12)


def test_system_channel_equal_bases_dephases():
    b = make_basis("haar", 3, 8)
    rho0 = random_density(3, 3, 9)
    reduced, predicted = system_channel(simulate(scenario_from_bases(rho0, [b, b])))
    dephased = sum(p @ rho0.op @ p for p in b.projectors())
    np.testing.assert_allclose(reduced, dephased, atol=1e-12)
    np.testing.assert_allclose(predicted, dephased, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(d=st.integers(2, 3), seed=st.integers(0, 10**6))
def test_system_channel_matches_random_pauli(d, seed):
    x, z = make_basis("haar", d, seed), make_basis("haar", d, seed + 1)
    traj = simulate(scenario_from_bases(random_density(d, d, seed), [x, z], track_reference=True))
    reduced, predicted = system_channel(traj)
    np.testing.assert_allclose(reduced, predicted, atol=1e-10)


def test_system_channel_needs_two_steps():
    with pytest.raises(UnsupportedError):
        system_channel(simulate(scenario_from_bases(basis_state(2), [X2])))


def test_random_pauli_channel_on_second_factor():
    rho = np.kron(np.diag([1.0, 0.0]), np.diag([1.0, 0.0])).astype(complex)
    out = random_pauli_channel(rho, X2, Z2, (2, 2), target=1)
    np.testing.assert_allclose(out, np.kron(np.diag([1.0, 0.0]), np.eye(2) / 2), atol=1e-15)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_complementary_channel_mub(d):
    x, z = make_basis("standard", d), make_basis("fourier", d)
    s = scenario_from_bases(maximally_mixed(d), [x, z])
    out = complementary_channel(s, maximally_mixed(d))
    traj = simulate(s)
    # devices carry both log d of the input's entropy and log d of the shared e-dit
    assert von_neumann(out) == pytest.approx(2 * np.log2(d))
    assert von_neumann(traj.final) == pytest.approx(von_neumann(maximally_mixed(d)))
    assert von_neumann(out) - von_neumann(traj.final.marginal(["S"])) == pytest.approx(np.log2(d))


def test_complementary_channel_equal_bases_keeps_classical_record():
    b = make_basis("haar", 3, 4)
    out = complementary_channel(scenario_from_bases(maximally_mixed(3), [b, b]), pure_state(b.ket(1)))
    assert out.purity() == pytest.approx(1.0)


def test_complementary_channel_is_linear():
    s = scenario_from_bases(maximally_mixed(3), [make_basis("haar", 3, 1), make_basis("haar", 3, 2)])
    a, b = random_density(3, 3, 1), random_density(3, 2, 2)
    mix = type(a)(0.3 * a.op + 0.7 * b.op, (3,), ("S",))
    lhs = complementary_channel(s, mix).op
    rhs = 0.3 * complementary_channel(s, a).op + 0.7 * complementary_channel(s, b).op
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_complementary_channel_rejects_mixed_devices():
    s = scenario_from_bases(maximally_mixed(2), [X2, Z2], devices=[[0.5, 0.5], [1.0, 0.0]])
    with pytest.raises(UnsupportedError):
        complementary_channel(s, maximally_mixed(2))


def test_mub_output_allows_input_recovery():
    from seqent.bounds import factorization_unitaries

    psi = random_pure(2, 3)
    traj = simulate(scenario_from_bases(psi, [X2, Z2]))
    h, u = factorization_unitaries(X2, Z2)
    st_ = traj.final
    op = linalg.apply_local(h, st_.op, st_.dims, [1])
    op = linalg.apply_local(u, op, st_.dims, [1, 2])
    m1 = linalg.partial_trace(op, st_.dims, [1])
    np.testing.assert_allclose(m1, psi.op, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(d=st.integers(2, 3), n=st.integers(1, 3), seed=st.integers(0, 10**6))
def test_locc_undo_restores_previous_state(d, n, seed):
    bases = [make_basis("haar", d, seed + k) for k in range(n)]
    traj = simulate(scenario_from_bases(random_density(d, d, seed), bases, track_reference=True))
    restored, kraus = locc_undo_last(traj)
    prev = traj.states[-2]
    dev = np.zeros((d, d))
    dev[0, 0] = 1
    expected = linalg.kron(prev.op, dev)
    dims = prev.dims + (d,)
    if "Sp" in prev.labels:
        order = list(range(len(dims) - 2)) + [len(dims) - 1, len(dims) - 2]
        expected = linalg.permute_subsystems(expected, dims, order)
    assert linalg.trace_distance(restored.op, expected) <= 1e-9
    for branch in undo_branches(traj):
        assert linalg.trace_distance(branch, expected) <= 1e-9
    comp = sum(k.conj().T @ k for k in kraus)
    np.testing.assert_allclose(comp, np.eye(d * d), atol=1e-10)


def test_undo_after_two_mub_steps_recovers_first_state():
    d = 3
    traj = simulate(scenario_from_bases(random_density(d, 2, 4), [make_basis("standard", d), make_basis("fourier", d)]))
    restored, _ = locc_undo_last(traj)
    recovered = linalg.partial_trace(restored.op, restored.dims, [0, 1])
    np.testing.assert_allclose(recovered, traj.states[1].op, atol=1e-12)


def test_undo_kraus_completeness_random_basis():
    ks = undo_kraus(make_basis("haar", 3, 12))
    np.testing.assert_allclose(sum(k.conj().T @ k for k in ks), np.eye(9), atol=1e-10)


def test_undo_rejects_mixed_last_device():
    traj = simulate(scenario_from_bases(basis_state(2), [X2, Z2], devices=[[1.0, 0.0], [0.5, 0.5]]))
    with pytest.raises(UnsupportedError):
        locc_undo_last(traj)


def test_conditional_states_mub_qubit():
    traj = simulate(scenario_from_bases(maximally_mixed(2), [X2, Z2]))
    out = conditional_states_given_device(traj, 1)
    assert [p for p, _ in out] == pytest.approx([0.5, 0.5])
    for _, st_ in out:
        assert st_.labels == ("S", "M2")
        assert st_.purity() == pytest.approx(1.0)
        np.testing.assert_allclose(st_.marginal(["S"]).op, np.eye(2) / 2, atol=1e-12)


def test_conditional_states_equal_bases_are_product():
    b = make_basis("haar", 3, 5)
    traj = simulate(scenario_from_bases(random_pure(3, 6), [b, b]))
    for p, st_ in conditional_states_given_device(traj, 1):
        if st_ is not None and p > 1e-12:
            assert von_neumann(st_.marginal(["S"])) == pytest.approx(0.0, abs=1e-9)


def test_conditional_states_rotation_spectrum():
    traj = simulate(scenario_from_bases(basis_state(2), [X2, make_basis("rotation", 2, np.pi / 6)]))
    out = conditional_states_given_device(traj, 1)
    assert out[0][0] == pytest.approx(1.0)
    assert out[1][0] == pytest.approx(0.0)
    assert out[1][1] is None
    np.testing.assert_allclose(np.linalg.eigvalsh(out[0][1].marginal(["S"]).op), [0.25, 0.75], atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(d=st.integers(2, 4), seed=st.integers(0, 10**6))
def test_conditional_schmidt_spectra_are_overlaps(d, seed):
    x, z = make_basis("haar", d, seed), make_basis("haar", d, seed + 1)
    rho0 = random_density(d, d, seed)
    traj = simulate(scenario_from_bases(rho0, [x, z]))
    out = conditional_states_given_device(traj, 1)
    np.testing.assert_allclose([p for p, _ in out], x.probabilities(rho0.op), atol=1e-12)
    ov = np.abs(x.vectors.conj().T @ z.vectors) ** 2
    for j, (p, st_) in enumerate(out):
        assert st_.purity() == pytest.approx(1.0, abs=1e-9)
        np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(st_.marginal(["S"]).op)), np.sort(ov[j]), atol=1e-9)


def test_conditional_states_index_range():
    traj = simulate(scenario_from_bases(basis_state(2), [X2, Z2]))
    with pytest.raises(IndexError):
        conditional_states_given_device(traj, 3)

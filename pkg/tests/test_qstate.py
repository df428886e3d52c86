import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqent import linalg
from seqent.linalg import DomainError, ShapeError
from seqent.qstate import (
    DensityState,
    basis_state,
    device_state,
    fourier_ket,
    haar_unitary,
    is_mub,
    make_basis,
    maximally_entangled,
    maximally_mixed,
    omega,
    overlap_c,
    overlap_matrix,
    phase_operator,
    purify,
    random_bipartite,
    random_density,
    random_pure,
    shift_operator,
    validate_distribution,
)


@pytest.mark.parametrize("d", range(2, 17))
def test_fourier_is_unbiased_to_standard(d):
    ov = overlap_matrix(make_basis("standard", d), make_basis("fourier", d))
    np.testing.assert_allclose(ov, np.full((d, d), 1.0 / d), atol=1e-12)
    assert overlap_c(make_basis("standard", d), make_basis("fourier", d)) == pytest.approx(1.0 / d)


def test_standard_basis_is_identity():
    np.testing.assert_array_equal(make_basis("standard", 3).vectors, np.eye(3))


def test_rotation_overlaps_at_pi_over_6():
    ov = overlap_matrix(make_basis("standard", 2), make_basis("rotation", 2, np.pi / 6))
    np.testing.assert_allclose(ov, [[0.75, 0.25], [0.25, 0.75]], atol=1e-15)
    assert overlap_c(make_basis("standard", 2), make_basis("rotation", 2, np.pi / 6)) == pytest.approx(0.75)


def test_identical_bases_have_unit_overlap():
    b = make_basis("haar", 4, 3)
    assert overlap_c(b, b) == pytest.approx(1.0)
    assert not is_mub(b, b)


def test_make_basis_errors():
    with pytest.raises(ValueError):
        make_basis("rotation", 3, 0.1)
    with pytest.raises(TypeError):
        make_basis("rotation", 2)
    with pytest.raises(TypeError):
        make_basis("haar", 2)
    with pytest.raises(ValueError):
        make_basis("mystery", 2)
    with pytest.raises(ShapeError):
        overlap_c(make_basis("standard", 2), make_basis("standard", 3))


@settings(max_examples=50, deadline=None)
@given(d=st.integers(2, 6), s1=st.integers(0, 10**6), s2=st.integers(0, 10**6))
def test_overlap_range(d, s1, s2):
    c = overlap_c(make_basis("haar", d, s1), make_basis("haar", d, s2))
    assert 1.0 / d - 1e-12 <= c <= 1.0 + 1e-12


def test_haar_is_deterministic_and_unitary():
    a, b = haar_unitary(4, 9), haar_unitary(4, 9)
    assert np.array_equal(a, b)
    assert linalg.is_unitary(a, 1e-12)


def test_haar_first_entry_statistics():
    vals = [abs(haar_unitary(2, s)[0, 0]) ** 2 for s in range(10_000)]
    assert abs(np.mean(vals) - 0.5) < 0.02


def test_phase_operator_examples():
    np.testing.assert_allclose(phase_operator(make_basis("standard", 2)), np.diag([1, -1]), atol=1e-15)
    w = omega(3)
    np.testing.assert_allclose(phase_operator(make_basis("standard", 3)), np.diag([1, w, w**2]), atol=1e-15)
    px = phase_operator(make_basis("fourier", 2))
    np.testing.assert_allclose(px, [[0, 1], [1, 0]], atol=1e-15)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_weyl_commutation(d):
    sz = phase_operator(make_basis("standard", d))
    sx = phase_operator(make_basis("fourier", d))
    assert linalg.is_unitary(sx, 1e-12)
    # with Fourier columns omega^(jk)/sqrt(d), the X-phase operator is the backward shift
    np.testing.assert_allclose(sx, shift_operator(d).T, atol=1e-12)
    np.testing.assert_allclose(sx @ sz, omega(d) * sz @ sx, atol=1e-12)
    np.testing.assert_allclose(np.linalg.eigvals(sz) ** d, np.ones(d), atol=1e-12)


def test_shift_operator():
    np.testing.assert_array_equal(shift_operator(2), [[0, 1], [1, 0]])
    np.testing.assert_array_equal(shift_operator(3) @ np.array([0, 0, 1]), [1, 0, 0])
    for d in range(2, 7):
        np.testing.assert_array_equal(np.linalg.matrix_power(shift_operator(d), d), np.eye(d))


def test_fourier_kets_form_basis():
    d = 5
    q = np.column_stack([fourier_ket(d, k) for k in range(d)])
    assert linalg.is_unitary(q, 1e-12)


def test_maximally_entangled_qubit_is_epr():
    phi = maximally_entangled(make_basis("standard", 2))
    epr = np.array([1, 0, 0, 1]) / np.sqrt(2)
    np.testing.assert_allclose(phi.op, np.outer(epr, epr), atol=1e-15)
    assert phi.purity() == pytest.approx(1.0)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_maximally_entangled_marginals(d):
    phi = maximally_entangled(make_basis("haar", d, d))
    np.testing.assert_allclose(phi.marginal(["S"]).op, np.eye(d) / d, atol=1e-12)
    np.testing.assert_allclose(phi.marginal(["Sp"]).op, np.eye(d) / d, atol=1e-12)


def test_density_state_validation():
    with pytest.raises(DomainError):
        DensityState(np.diag([0.5, 0.4]), (2,), ("S",))
    with pytest.raises(DomainError):
        DensityState(np.diag([1.2, -0.2]), (2,), ("S",))
    with pytest.raises(DomainError):
        DensityState(np.array([[0.5, 0.3], [0.1, 0.5]]), (2,), ("S",))
    with pytest.raises(ShapeError):
        DensityState(np.eye(4) / 4, (2, 3), ("A", "B"))
    with pytest.raises(ShapeError):
        DensityState(np.eye(4) / 4, (2, 2), ("A", "A"))
    with pytest.raises(KeyError):
        maximally_mixed(2).index("Q")


def test_marginal_keeps_original_order():
    st_ = random_bipartite((2, 3), 5, labels=("A", "B"))
    m = st_.marginal(["B", "A"])
    assert m.labels == ("A", "B")
    r = st_.reorder(["B", "A"])
    assert r.labels == ("B", "A")
    np.testing.assert_allclose(r.marginal(["A"]).op, st_.marginal(["A"]).op, atol=1e-14)


def test_purify_pure_input():
    psi = random_pure(3, 4)
    p = purify(psi)
    np.testing.assert_allclose(p.marginal(["S"]).op, psi.op, atol=1e-12)
    # reference factor is pure as well
    assert p.marginal(["Sp"]).purity() == pytest.approx(1.0)


def test_purify_maximally_mixed_qubit():
    p = purify(maximally_mixed(2))
    assert p.purity() == pytest.approx(1.0)
    np.testing.assert_allclose(p.marginal(["Sp"]).op, np.eye(2) / 2, atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(d=st.integers(2, 5), seed=st.integers(0, 10**6), data=st.data())
def test_purify_round_trip(d, seed, data):
    rank = data.draw(st.integers(1, d))
    rho = random_density(d, rank, seed)
    p = purify(rho)
    assert p.purity() == pytest.approx(1.0, abs=1e-10)
    assert linalg.trace_distance(p.marginal(["S"]).op, rho.op) <= 1e-10


def test_random_density_rank_and_determinism():
    r = random_density(4, 3, 7)
    w = linalg.eigvalsh(r.op)
    assert np.sum(w > 1e-12) == 3
    assert np.array_equal(r.op, random_density(4, 3, 7).op)
    assert random_density(3, 1, 2).purity() == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ValueError):
        random_density(3, 4, 0)


def test_random_density_mean_eigenvalue():
    vals = np.concatenate([linalg.eigvalsh(random_density(3, 3, s).op) for s in range(200)])
    assert np.mean(vals) == pytest.approx(1 / 3)


def test_device_distributions():
    np.testing.assert_allclose(device_state([0.25, 0.75], "M1").op, np.diag([0.25, 0.75]))
    with pytest.raises(DomainError):
        validate_distribution([0.5, 0.6])
    with pytest.raises(DomainError):
        validate_distribution([1.1, -0.1])


def test_basis_state_and_probabilities():
    b = make_basis("fourier", 4)
    np.testing.assert_allclose(b.probabilities(basis_state(4, 2).op), np.full(4, 0.25), atol=1e-15)

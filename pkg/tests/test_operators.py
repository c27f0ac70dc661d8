import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsysid.operators import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    apply_super,
    commutator,
    expm_hermitian_prop,
    from_real_coords,
    hermitian_basis,
    hs_inner,
    liouvillian,
    projector,
    random_hermitian,
    random_unitary,
    structure_flags,
    to_real_coords,
    unvectorize,
    vectorize,
)

EPS = np.finfo(float).eps


def test_commutator_pauli():
    np.testing.assert_allclose(commutator(PAULI_X, PAULI_Y), 2j * PAULI_Z)


def test_commutator_self_vanishes(rng):
    A = random_hermitian(5, rng)
    assert np.count_nonzero(commutator(A, A)) == 0


def test_commutator_projector_x():
    expected = np.array([[0, 1], [-1, 0]], dtype=complex)
    np.testing.assert_array_equal(commutator(projector(0, 2), PAULI_X), expected)


def test_commutator_of_hermitians_is_skew_traceless(rng):
    C = commutator(random_hermitian(4, rng), random_hermitian(4, rng))
    assert {"skew_hermitian", "traceless"} <= structure_flags(C)


def test_commutator_dimension_mismatch():
    with pytest.raises(ValueError):
        commutator(np.eye(2), np.eye(3))


def test_liouvillian_pauli():
    np.testing.assert_allclose(apply_super(liouvillian(PAULI_Z), PAULI_X), 2 * PAULI_Y, atol=1e-15)


def test_liouvillian_kills_identity(rng):
    H = random_hermitian(4, rng)
    assert np.allclose(apply_super(liouvillian(H), np.eye(4)), 0)


def test_liouvillian_traceless_output(rng):
    H = random_hermitian(3, rng)
    rho = random_hermitian(3, rng, traceless=False)
    assert abs(np.trace(apply_super(liouvillian(H), rho))) < 1e-13


def test_liouvillian_rejects_non_hermitian():
    with pytest.raises(ValueError):
        liouvillian(np.array([[0, 1], [0, 0]]))


def test_liouvillian_preserves_hermiticity(rng):
    H = random_hermitian(4, rng)
    X = random_hermitian(4, rng, traceless=False)
    Y = apply_super(liouvillian(H), X)
    assert "hermitian" in structure_flags(Y)


def test_liouvillian_is_lie_morphism(rng):
    # L_H L_G - L_G L_H = L_K with K = -i[H, G] (hermitian)
    d = 4
    for _ in range(100):
        H, G = random_hermitian(d, rng), random_hermitian(d, rng)
        LH, LG = liouvillian(H), liouvillian(G)
        lhs = LH @ LG - LG @ LH
        rhs = liouvillian(-1j * commutator(H, G))
        assert np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs) <= 10 * d * d * EPS


def test_vectorization_convention(rng):
    A, B, X = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(3))
    np.testing.assert_allclose(vectorize(A @ X @ B), np.kron(A, B.T) @ vectorize(X))


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_vectorize_roundtrip(d, seed):
    X = np.random.default_rng(seed).normal(size=(d, d)) + 0j
    assert np.array_equal(unvectorize(vectorize(X)), X)


def test_expm_zero_time(rng):
    np.testing.assert_allclose(expm_hermitian_prop(random_hermitian(4, rng), 0.0), np.eye(4), atol=1e-14)


def test_expm_diagonal():
    U = expm_hermitian_prop(PAULI_Z, np.pi / 2)
    np.testing.assert_allclose(U, np.diag([np.exp(-1j * np.pi / 2), np.exp(1j * np.pi / 2)]), atol=1e-15)


def test_expm_pauli_period():
    np.testing.assert_allclose(expm_hermitian_prop(PAULI_X, np.pi), -np.eye(2), atol=1e-15)


@pytest.mark.parametrize("d", [2, 3, 5, 8])
def test_expm_unitary_to_roundoff(d, rng):
    U = expm_hermitian_prop(random_hermitian(d, rng), 1.7)
    assert np.linalg.norm(U.conj().T @ U - np.eye(d)) <= 10 * d * EPS


def test_expm_composition(rng):
    for d in range(2, 9):
        H = random_hermitian(d, rng)
        s, t = rng.uniform(-2, 2, 2)
        lhs = expm_hermitian_prop(H, s) @ expm_hermitian_prop(H, t)
        rhs = expm_hermitian_prop(H, s + t)
        assert np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs) <= 1e-12


def test_expm_rejects_nonfinite():
    with pytest.raises(ValueError):
        expm_hermitian_prop(np.array([[np.nan, 0], [0, 1]]), 1.0)


def test_hs_inner_values():
    assert hs_inner(PAULI_X, PAULI_X) == 2
    assert hs_inner(PAULI_X, PAULI_Y) == 0
    assert hs_inner(np.eye(5), np.eye(5)) == 5


def test_hs_inner_positive(rng):
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert hs_inner(A, A).real > 0 and abs(hs_inner(A, A).imag) < 1e-15


@pytest.mark.parametrize("d", [1, 2, 3, 4, 6])
def test_hermitian_basis_orthonormal(d):
    G = hermitian_basis(d)
    assert G.shape == (d * d, d, d)
    gram = np.einsum("aij,bij->ab", G.conj(), G)
    np.testing.assert_allclose(gram, np.eye(d * d), atol=1e-14)
    np.testing.assert_allclose(G[0], np.eye(d) / np.sqrt(d))
    for g in G:
        assert "hermitian" in structure_flags(g)


def test_real_coords_roundtrip(rng):
    H = random_hermitian(5, rng, traceless=False)
    np.testing.assert_allclose(from_real_coords(to_real_coords(H)), H, atol=1e-14)


def test_structure_flags(rng):
    U = random_unitary(3, rng)
    assert "unitary" in structure_flags(U)
    assert structure_flags(projector(0, 3)) >= {"hermitian", "density"}
    assert "traceless" in structure_flags(PAULI_Z)
    assert "density" not in structure_flags(-projector(0, 3))

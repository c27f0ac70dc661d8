import numpy as np
import pytest
from conftest import HEISENBERG, X1, X2, Y1, Y2, Z1, Z2, random_system, two_qubit_system
from oracles import naive_closure_dim

from qsysid.lie import ClosureDepthError, is_controllable, lie_closure
from qsysid.operators import PAULI_X, PAULI_Y, PAULI_Z, random_hermitian, random_unitary
from qsysid.system import QuantumSystem


def test_su2_from_x_and_y():
    assert lie_closure([PAULI_X, PAULI_Y]).dim == 3


def test_single_generator_is_abelian():
    assert lie_closure([Z1 + Z2]).dim == 1


def test_two_qubit_heisenberg_closure():
    gens = [X1, Y1, HEISENBERG]
    # frozen from the naive spanning-set oracle
    assert naive_closure_dim(gens) == 15
    assert lie_closure(gens).dim == 15


def test_basis_is_orthonormal_skew_traceless(rng):
    basis = lie_closure([random_hermitian(3, rng), random_hermitian(3, rng)])
    E = basis.elements.reshape(basis.dim, -1)
    np.testing.assert_allclose(E.conj() @ E.T, np.eye(basis.dim), atol=1e-10)
    for e in basis.elements:
        assert np.linalg.norm(e + e.conj().T) < 1e-12
        assert abs(np.trace(e)) < 1e-12


def test_basis_closed_under_commutation(rng):
    basis = lie_closure([Z1 + 0.3 * Z2, X1 @ X2])
    for a in basis.elements:
        for b in basis.elements:
            C = a @ b - b @ a
            assert basis.residual(C) <= 1e-9 * max(np.linalg.norm(C), 1e-300)


def test_skew_hermitian_generators_accepted():
    assert lie_closure([1j * PAULI_X, 1j * PAULI_Z]).dim == 3


def test_errors():
    with pytest.raises(ValueError):
        lie_closure([])
    with pytest.raises(ValueError):
        lie_closure([PAULI_X, np.eye(3)])
    with pytest.raises(ValueError):
        lie_closure([np.array([[0, 1], [0, 0]])])


def test_depth_cap_is_loud():
    with pytest.raises(ClosureDepthError):
        lie_closure([X1, Y1, HEISENBERG], max_depth=0)


def test_two_qubit_setup_controllable():
    rep = is_controllable(two_qubit_system())
    assert rep.controllable and rep.dimension == 15 and rep.full_dimension == 15


def test_drift_only_diagonal_not_controllable():
    H0 = np.diag([1.0, -0.3, -0.7]).astype(complex)
    rho = np.diag([1.0, 0, 0])
    rep = is_controllable(QuantumSystem(H0, (H0,), (rho,), rho))
    assert not rep.controllable and rep.dimension == 1


def test_qubit_controllable():
    rho = np.diag([1.0, 0])
    rep = is_controllable(QuantumSystem(PAULI_Z, (PAULI_X, PAULI_Y), (PAULI_Z,), rho))
    assert rep.controllable and rep.dimension == 3


def test_dimension_monotone(rng):
    for _ in range(10):
        d = int(rng.integers(2, 6))
        gens = [np.diag(rng.normal(size=d)).astype(complex)]
        if rng.random() < 0.5:
            gens.append(np.diag(rng.normal(size=d - 1), 1).astype(complex) + 0j)
            gens[-1] = gens[-1] + gens[-1].T
        base = lie_closure(gens).dim
        more = lie_closure(gens + [random_hermitian(d, rng)]).dim
        assert more >= base


def test_dimension_monotone_structured():
    a = lie_closure([Z1]).dim
    b = lie_closure([Z1, X1]).dim
    c = lie_closure([Z1, X1, Z1 @ Z2]).dim
    d = lie_closure([Z1, X1, Z1 @ Z2, X2]).dim
    assert a <= b <= c <= d
    # frozen from naive_closure_dim on the same generator lists
    assert (a, b, c, d) == (1, 3, 6, 10)
    assert naive_closure_dim([Z1, X1, Z1 @ Z2, X2]) == 10


def test_basis_independence(rng):
    gens = [Z1 + Z2, X1 @ X2 + Y1 @ Y2]
    ref = lie_closure(gens).dim
    for _ in range(50):
        U = random_unitary(4, rng)
        assert lie_closure([U @ g @ U.conj().T for g in gens]).dim == ref


def test_closure_idempotent(rng):
    basis = lie_closure([Z1, X1 @ X2])
    again = lie_closure(list(basis.elements))
    assert again.dim == basis.dim


@pytest.mark.parametrize("d", [2, 3, 4, 8])
def test_random_systems_match_oracle(d, rng):
    for _ in range(3):
        s = random_system(d, rng)
        assert is_controllable(s).dimension == naive_closure_dim(list(s.hamiltonians)) == d * d - 1

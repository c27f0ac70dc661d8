"""Dense complex-matrix primitives: commutators, Liouvillians, propagators.

Operators are plain ``numpy`` arrays of shape ``(d, d)``; superoperators are
``(d**2, d**2)`` arrays acting on row-stacked vectorizations, so that

    vec(A @ X @ B) == kron(A, B.T) @ vec(X)

holds for every matrix triple.  Structural properties (hermitian, unitary,
...) are checked on demand with :func:`structure_flags` instead of being
carried around as mutable tags.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

TAU_STRUCT = 1e-10

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _check_square(A: np.ndarray, name: str = "operator") -> None:
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {A.shape}")


def _check_same_dim(A: np.ndarray, B: np.ndarray) -> None:
    _check_square(A)
    _check_square(B)
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")


def is_hermitian(A: np.ndarray, tol: float = TAU_STRUCT) -> bool:
    return bool(np.linalg.norm(A - A.conj().T) <= tol * max(np.linalg.norm(A), 1.0))


def is_skew_hermitian(A: np.ndarray, tol: float = TAU_STRUCT) -> bool:
    return bool(np.linalg.norm(A + A.conj().T) <= tol * max(np.linalg.norm(A), 1.0))


def is_traceless(A: np.ndarray, tol: float = TAU_STRUCT) -> bool:
    return bool(abs(np.trace(A)) <= tol * max(np.linalg.norm(A), 1.0))


def is_unitary(A: np.ndarray, tol: float = TAU_STRUCT) -> bool:
    d = A.shape[0]
    return bool(np.linalg.norm(A.conj().T @ A - np.eye(d)) <= tol * max(d, 1))


def is_density(A: np.ndarray, tol: float = TAU_STRUCT) -> bool:
    if not is_hermitian(A, tol):
        return False
    if abs(np.trace(A) - 1.0) > tol:
        return False
    return bool(np.linalg.eigvalsh(0.5 * (A + A.conj().T)).min() >= -tol)


def structure_flags(A: np.ndarray, tol: float = TAU_STRUCT) -> frozenset[str]:
    """Return the structural flags that hold for ``A`` within ``tol``.

    Possible members are ``"hermitian"``, ``"skew_hermitian"``,
    ``"traceless"``, ``"unitary"`` and ``"density"``.
    """
    A = np.asarray(A)
    _check_square(A)
    checks = {
        "hermitian": is_hermitian,
        "skew_hermitian": is_skew_hermitian,
        "traceless": is_traceless,
        "unitary": is_unitary,
        "density": is_density,
    }
    return frozenset(name for name, check in checks.items() if check(A, tol))


def traceless_part(A: np.ndarray) -> np.ndarray:
    d = A.shape[0]
    return A - (np.trace(A) / d) * np.eye(d)


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Return ``AB - BA``."""
    _check_same_dim(A, B)
    return A @ B - B @ A


def hs_inner(A: np.ndarray, B: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product ``tr(A^dagger B)``."""
    _check_same_dim(A, B)
    return complex(np.vdot(A, B))


def vectorize(X: np.ndarray) -> np.ndarray:
    return np.asarray(X).reshape(-1)


def unvectorize(v: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise ValueError(f"vector of length {v.size} is not a square operator")
    return np.asarray(v).reshape(d, d)


def apply_super(S: np.ndarray, X: np.ndarray) -> np.ndarray:
    return unvectorize(S @ vectorize(X))


def sprepost(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Superoperator of ``X -> A X B``."""
    return np.kron(A, B.T)


def conjugation_super(U: np.ndarray) -> np.ndarray:
    """Superoperator of ``X -> U X U^dagger``."""
    return np.kron(U, U.conj())


def liouvillian(H: np.ndarray) -> np.ndarray:
    """Superoperator of ``X -> -i[H, X]`` for hermitian ``H``.

    Raises
    ------
    ValueError
        If ``H`` is not hermitian.
    """
    H = np.asarray(H, dtype=complex)
    _check_square(H, "H")
    if not is_hermitian(H):
        raise ValueError("liouvillian requires a hermitian generator")
    eye = np.eye(H.shape[0])
    return -1j * (np.kron(H, eye) - np.kron(eye, H.T))


def expm_hermitian_prop(H: np.ndarray, t: float) -> np.ndarray:
    """Return ``exp(-i H t)`` computed from the eigendecomposition of ``H``."""
    H = np.asarray(H, dtype=complex)
    _check_square(H, "H")
    if not np.all(np.isfinite(H)) or not np.isfinite(t):
        raise ValueError("non-finite entries in propagator input")
    w, V = np.linalg.eigh(0.5 * (H + H.conj().T))
    return (V * np.exp(-1j * w * t)) @ V.conj().T


def ket(n: int, d: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[n] = 1.0
    return v


def projector(n: int, d: int) -> np.ndarray:
    P = np.zeros((d, d), dtype=complex)
    P[n, n] = 1.0
    return P


def embed(op: np.ndarray, site: int, n_sites: int, local_dim: int = 2) -> np.ndarray:
    """Place a single-site operator on ``site`` of an ``n_sites`` tensor product."""
    out = np.ones((1, 1), dtype=complex)
    for j in range(n_sites):
        out = np.kron(out, op if j == site else np.eye(local_dim))
    return out


@lru_cache(maxsize=32)
def _hermitian_basis_cached(d: int) -> np.ndarray:
    mats = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            S = np.zeros((d, d), dtype=complex)
            S[j, k] = S[k, j] = 1 / np.sqrt(2)
            A = np.zeros((d, d), dtype=complex)
            A[j, k] = -1j / np.sqrt(2)
            A[k, j] = 1j / np.sqrt(2)
            mats.extend([S, A])
    for l in range(1, d):
        D = np.zeros((d, d), dtype=complex)
        D[np.arange(l), np.arange(l)] = 1.0
        D[l, l] = -l
        mats.append(D / np.sqrt(l * (l + 1)))
    basis = np.array(mats)
    basis.setflags(write=False)
    return basis


def hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal hermitian basis of the ``d x d`` matrices, shape ``(d**2, d, d)``.

    The first element is ``I / sqrt(d)``; the rest are generalized Gell-Mann
    matrices (symmetric, antisymmetric, then diagonal), all traceless.
    """
    if d < 1:
        raise ValueError("dimension must be positive")
    return _hermitian_basis_cached(int(d))


def to_real_coords(H: np.ndarray) -> np.ndarray:
    """Real coordinates of a hermitian ``H`` in :func:`hermitian_basis`."""
    d = H.shape[0]
    B = hermitian_basis(d).reshape(d * d, -1)
    return np.real(B.conj() @ vectorize(H))


def from_real_coords(x: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(x.size)))
    return np.tensordot(x, hermitian_basis(d), axes=1)


def random_hermitian(d: int, rng: np.random.Generator, traceless: bool = True) -> np.ndarray:
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    H = 0.5 * (A + A.conj().T)
    return traceless_part(H) if traceless else H


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    Z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    ph = np.diag(R) / np.abs(np.diag(R))
    return Q * ph


def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())

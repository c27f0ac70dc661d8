"""Dynamical Lie algebra closure and the controllability rank test."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qsysid.operators import is_hermitian, is_skew_hermitian, traceless_part
from qsysid.system import QuantumSystem

TAU_RANK = 1e-9
MAX_DEPTH = 64


class ClosureDepthError(RuntimeError):
    """Raised when commutator rounds fail to saturate within the depth cap."""


@dataclass(frozen=True)
class LieBasis:
    """Orthonormal basis of a real matrix Lie algebra of skew-hermitian matrices.

    ``elements`` has shape ``(dim, d, d)``; ``closure_depth`` counts the
    commutator rounds that added at least one element.
    """

    dim_hilbert: int
    elements: np.ndarray
    generator_count: int
    closure_depth: int

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    @property
    def is_full(self) -> bool:
        return self.dim == self.dim_hilbert**2 - 1

    def residual(self, A: np.ndarray) -> float:
        """Norm of the component of ``A`` orthogonal to the algebra."""
        v = np.asarray(A, dtype=complex).reshape(-1)
        if self.dim == 0:
            return float(np.linalg.norm(v))
        Q = self.elements.reshape(self.dim, -1)
        r = v - (Q.conj() @ v) @ Q
        return float(np.linalg.norm(r))

    def contains(self, A: np.ndarray, tol: float = 1e-9) -> bool:
        return self.residual(A) <= tol * max(np.linalg.norm(A), 1e-300)


def _project_out(Q: np.ndarray, k: int, v: np.ndarray) -> np.ndarray:
    # two passes of block Gram-Schmidt against the first k rows of Q
    if k == 0:
        return v
    B = Q[:k]
    for _ in range(2):
        v = v - np.real(B.conj() @ v) @ B
    return v


def lie_closure(generators, tau_rank: float = TAU_RANK, max_depth: int = MAX_DEPTH) -> LieBasis:
    """Orthonormal basis of the real Lie algebra generated by ``generators``.

    Hermitian inputs are multiplied by ``i``; skew-hermitian inputs are used
    as given.  Only traceless parts enter, so the result lives in ``su(d)``.
    Each round commutes the elements added in the previous round with every
    element found so far; a commutator is accepted when its residual after
    projection exceeds ``tau_rank`` times its own norm.  Candidates whose norm
    is below ``tau_rank`` times the norm of their inputs count as zero.

    Parameters
    ----------
    generators : sequence of (d, d) arrays
    tau_rank : float
        Relative rank threshold.
    max_depth : int
        Maximum number of commutator rounds before :class:`ClosureDepthError`.

    Returns
    -------
    LieBasis
    """
    gens = [np.asarray(G, dtype=complex) for G in generators]
    if not gens:
        raise ValueError("lie_closure needs at least one generator")
    d = gens[0].shape[0]
    for j, G in enumerate(gens):
        if G.shape != (d, d):
            raise ValueError(f"generator {j} has shape {G.shape}, expected {(d, d)}")

    n_max = d * d - 1
    Q = np.zeros((max(n_max, 1), d * d), dtype=complex)
    k = 0

    def try_add(A: np.ndarray, scale: float) -> bool:
        # scale: size of the inputs that produced A, so roundoff zeros are dropped
        nonlocal k
        if k >= n_max:
            return False
        v = A.reshape(-1)
        nv = np.linalg.norm(v)
        if nv <= tau_rank * scale:
            return False
        r = _project_out(Q, k, v)
        nr = np.linalg.norm(r)
        if nr <= tau_rank * nv:
            return False
        Q[k] = r / nr
        k += 1
        return True

    for j, G in enumerate(gens):
        if is_hermitian(G):
            A = 1j * G
        elif is_skew_hermitian(G):
            A = G
        else:
            raise ValueError(f"generator {j} is neither hermitian nor skew-hermitian")
        scale = np.linalg.norm(A)
        A = traceless_part(A)
        try_add(0.5 * (A - A.conj().T), scale)

    new = list(range(k))
    depth = 0
    while new and k < n_max:
        if depth >= max_depth:
            raise ClosureDepthError(f"no saturation after {max_depth} commutator rounds")
        start = k
        n_all = k
        for i in new:
            Ei = Q[i].reshape(d, d)
            for j in range(n_all):
                if j == i:
                    continue
                Ej = Q[j].reshape(d, d)
                C = Ei @ Ej - Ej @ Ei
                try_add(0.5 * (C - C.conj().T), 1.0)
                if k >= n_max:
                    break
            if k >= n_max:
                break
        new = list(range(start, k))
        if new:
            depth += 1

    elements = Q[:k].reshape(k, d, d).copy()
    return LieBasis(dim_hilbert=d, elements=elements, generator_count=len(gens), closure_depth=depth)


@dataclass(frozen=True)
class ControllabilityReport:
    controllable: bool
    dimension: int
    full_dimension: int
    basis: LieBasis

    def __bool__(self) -> bool:
        return self.controllable


def is_controllable(system: QuantumSystem, tau_rank: float = TAU_RANK) -> ControllabilityReport:
    """Decide whether ``{i H0, i Hk}`` generates all of ``su(d)``."""
    basis = lie_closure(system.hamiltonians, tau_rank)
    full = system.dim**2 - 1
    return ControllabilityReport(
        controllable=basis.dim == full, dimension=basis.dim, full_dimension=full, basis=basis
    )

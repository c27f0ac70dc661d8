"""Input-output equivalence, similarity certificates and residual gauge analysis.

Two systems are compared in two ways.  :func:`moments_equal` checks the
scalars ``tr{M_l L_alpha rho0}`` for every multi-index up to a length; it can
refute equivalence but never prove it.  :func:`equivalence_certificate` grows
paired Krylov spans ``(L^_alpha rho^0, L_alpha rho0)`` until they saturate the
operator space and then either assembles the intertwining superoperator or
reports the first linear relation that fails to transfer.  The latter is a
finite, decisive test.

Multi-indices ``alpha = (a1, ..., aL)`` apply ``L_{a1}`` first; index 0 is
the drift, index ``k`` the k-th control.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from qsysid.lie import TAU_RANK, is_controllable
from qsysid.operators import (
    commutator,
    hermitian_basis,
    is_hermitian,
    to_real_coords,
)
from qsysid.system import QuantumSystem

DEFAULT_TERM_CAP = 200_000


class NotControllableError(ValueError):
    pass


class BudgetExceededError(ValueError):
    pass


class SaturationError(RuntimeError):
    pass


class RankOneError(ValueError):
    """The superoperator is not a conjugation ``X -> U X U^dagger``."""


def _lie_apply(H: np.ndarray, X: np.ndarray) -> np.ndarray:
    return -1j * (H @ X - X @ H)


def apply_word(system: QuantumSystem, alpha, X: np.ndarray | None = None) -> np.ndarray:
    """Return ``L_{a_L} ... L_{a_1} X`` (``X`` defaults to ``rho0``)."""
    hs = system.hamiltonians
    Y = system.initial_state if X is None else X
    for a in alpha:
        if not 0 <= a < len(hs):
            raise IndexError(f"multi-index entry {a} out of range 0..{len(hs) - 1}")
        Y = _lie_apply(hs[a], Y)
    return Y


def moment(system: QuantumSystem, ell: int, alpha=()) -> float:
    """The real scalar ``tr{M_ell L_alpha rho0}``."""
    if not 0 <= ell < system.n_observables:
        raise IndexError(f"observable index {ell} out of range")
    val = np.trace(system.observables[ell] @ apply_word(system, alpha))
    scale = np.linalg.norm(system.observables[ell]) * max(
        1.0, np.prod([2 * np.linalg.norm(system.hamiltonians[a], 2) for a in alpha])
    )
    assert abs(val.imag) <= 1e-12 * max(scale, 1.0), f"complex moment {val}"
    return float(val.real)


def multi_indices(n_letters: int, max_length: int):
    """All words over ``range(n_letters)`` by length, lexicographic within a length."""
    for L in range(max_length + 1):
        yield from itertools.product(range(n_letters), repeat=L)


@dataclass
class MomentTable:
    max_length: int
    values: dict[tuple[int, tuple[int, ...]], float]

    @classmethod
    def build(cls, system: QuantumSystem, max_length: int) -> "MomentTable":
        values = {}
        hs = system.hamiltonians
        states = {(): system.initial_state}
        for alpha in multi_indices(len(hs), max_length):
            if alpha:
                states[alpha] = _lie_apply(hs[alpha[-1]], states[alpha[:-1]])
            for ell, M in enumerate(system.observables):
                values[(ell, alpha)] = float(np.real(np.trace(M @ states[alpha])))
        return cls(max_length=max_length, values=values)


@dataclass(frozen=True)
class MomentComparison:
    equal: bool
    terms_checked: int
    witness: tuple[int, tuple[int, ...]] | None = None
    values: tuple[float, float] | None = None

    def __bool__(self) -> bool:
        return self.equal


def moments_equal(
    sys_a: QuantumSystem,
    sys_b: QuantumSystem,
    max_length: int,
    tol: float = 1e-8,
    term_cap: int = DEFAULT_TERM_CAP,
) -> MomentComparison:
    """Compare all moments with ``len(alpha) <= max_length``.

    The tolerance is absolute after scaling by
    ``||M|| * prod(2 ||H_a||)``, a bound on the size of each moment.  The first
    violating ``(ell, alpha)`` in breadth-first lexicographic order is
    returned as the witness.
    """
    if (sys_a.n_controls, sys_a.n_observables) != (sys_b.n_controls, sys_b.n_observables):
        raise ValueError("systems differ in number of controls or observables")
    n_letters = sys_a.n_controls + 1
    n_words = sum(n_letters**L for L in range(max_length + 1))
    if n_words * sys_a.n_observables > term_cap:
        raise BudgetExceededError(
            f"{n_words * sys_a.n_observables} moments exceed the cap of {term_cap}"
        )
    ha, hb = sys_a.hamiltonians, sys_b.hamiltonians
    norms = [max(2 * np.linalg.norm(x, 2), 2 * np.linalg.norm(y, 2)) for x, y in zip(ha, hb)]
    mnorm = [
        max(np.linalg.norm(x), np.linalg.norm(y))
        for x, y in zip(sys_a.observables, sys_b.observables)
    ]
    states = {(): (sys_a.initial_state, sys_b.initial_state)}
    checked = 0
    for alpha in multi_indices(n_letters, max_length):
        if alpha:
            xa, xb = states[alpha[:-1]]
            a = alpha[-1]
            states[alpha] = (_lie_apply(ha[a], xa), _lie_apply(hb[a], xb))
        xa, xb = states[alpha]
        scale = float(np.prod([norms[a] for a in alpha])) if alpha else 1.0
        for ell in range(sys_a.n_observables):
            va = float(np.real(np.trace(sys_a.observables[ell] @ xa)))
            vb = float(np.real(np.trace(sys_b.observables[ell] @ xb)))
            checked += 1
            if abs(va - vb) > tol * mnorm[ell] * max(scale, 1.0):
                return MomentComparison(False, checked, (ell, alpha), (va, vb))
    return MomentComparison(True, checked)


def reshuffle(S: np.ndarray) -> np.ndarray:
    """Realign a superoperator so that ``X -> A X B`` becomes ``vec(A) vec(B^T)^T``."""
    d = int(round(np.sqrt(S.shape[0])))
    return S.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)


def extract_unitary(T: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Recover ``U`` from the superoperator of ``X -> U X U^dagger``.

    The result is canonical up to global phase: its largest-magnitude entry
    is made real and positive.

    Raises
    ------
    RankOneError
        If the second singular value of the reshuffled matrix exceeds
        ``tol`` times the first, i.e. ``T`` is not a conjugation.
    ValueError
        If ``T`` is singular.
    """
    T = np.asarray(T, dtype=complex)
    n = T.shape[0]
    d = int(round(np.sqrt(n)))
    if T.shape != (n, n) or d * d != n:
        raise ValueError(f"superoperator has invalid shape {T.shape}")
    s_T = np.linalg.svd(T, compute_uv=False)
    if s_T[-1] <= 1e-12 * s_T[0]:
        raise ValueError("superoperator is not invertible")
    R = reshuffle(T)
    u, s, vh = np.linalg.svd(R)
    if s.size > 1 and s[1] > tol * s[0]:
        raise RankOneError(f"second singular value ratio {s[1] / s[0]:.3e} exceeds {tol:g}")
    U = u[:, 0].reshape(d, d) * np.sqrt(s[0])
    # normalize the scale so that U^dagger U = I on average
    U *= np.sqrt(d) / np.linalg.norm(U)
    idx = np.argmax(np.abs(U))
    U *= np.abs(U.flat[idx]) / U.flat[idx]
    return U


def phase_aligned_distance(U: np.ndarray, V: np.ndarray) -> float:
    """``min_phi ||U - e^{i phi} V||_F``."""
    ov = np.vdot(V, U)
    ph = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(U - ph * V))


@dataclass(frozen=True)
class InequivalenceWitness:
    """Evidence that two systems are not similar.

    ``kind`` is ``"dependency"`` (a linear relation among the hatted Krylov
    vectors that does not hold for the real system, or vice versa),
    ``"observable"`` (a moment that differs) or ``"similarity"`` (the
    assembled map fails the intertwining relations).
    """

    kind: str
    alpha: tuple[int, ...]
    detail: str
    violation: float
    observable: int | None = None
    coefficients: np.ndarray | None = None


@dataclass(frozen=True)
class SimilarityCertificate:
    """Superoperator ``T`` with ``L_k = T L^_k T^-1``, ``rho0 = T rho^0``, ``M^_l = M_l o T``.

    ``unitary`` is ``U`` with ``T(X) = U X U^dagger``, so that the real system
    equals the estimated one conjugated by ``U``.
    """

    T: np.ndarray
    pairing: list[tuple[tuple[int, ...], np.ndarray]]
    residual: float
    unitary: np.ndarray | None = None


@dataclass(frozen=True)
class EquivalenceResult:
    equivalent: bool
    certificate: SimilarityCertificate | None = None
    witness: InequivalenceWitness | None = None

    def __bool__(self) -> bool:
        return self.equivalent


def _coords_map(system: QuantumSystem):
    d = system.dim
    G = hermitian_basis(d)
    # real matrices of X -> -i[H, X] in hermitian coordinates
    mats = []
    for H in system.hamiltonians:
        cols = [to_real_coords(_lie_apply(H, g)) for g in G]
        mats.append(np.array(cols).T)
    obs = np.array([[np.real(np.trace(M @ g)) for g in G] for M in system.observables])
    return mats, obs, to_real_coords(system.initial_state)


def similarity_residual(
    T: np.ndarray, sys_real: QuantumSystem, sys_hat: QuantumSystem
) -> float:
    """Largest relative violation of the three similarity relations."""
    Tinv = np.linalg.inv(T)
    worst = 0.0
    for L, Lh in zip(sys_real.liouvillians(), sys_hat.liouvillians()):
        err = np.linalg.norm(T @ Lh @ Tinv - L) / max(np.linalg.norm(L), 1.0)
        worst = max(worst, err)
    rho = sys_real.initial_state.reshape(-1)
    rho_h = sys_hat.initial_state.reshape(-1)
    worst = max(worst, np.linalg.norm(T @ rho_h - rho) / max(np.linalg.norm(rho), 1.0))
    for M, Mh in zip(sys_real.observables, sys_hat.observables):
        m = M.T.reshape(-1)
        mh = Mh.T.reshape(-1)
        worst = max(worst, np.linalg.norm(m @ T - mh) / max(np.linalg.norm(M), 1.0))
    return float(worst)


def equivalence_certificate(
    sys_real: QuantumSystem,
    sys_hat: QuantumSystem,
    tol: float = 1e-8,
    tau_rank: float = TAU_RANK,
    check_controllable: bool = True,
    unitary_tol: float = 1e-6,
) -> EquivalenceResult:
    """Decide equivalence of ``sys_real`` and ``sys_hat`` by paired Krylov saturation.

    Pairs ``(x^_j, x_j)`` start from ``(rho^0, rho0)`` and are extended
    breadth-first by every Liouvillian.  Each candidate hatted vector is
    orthogonalized against the accepted hatted basis; the same coefficients
    are applied to the real partner, so the accepted hatted vectors stay
    orthonormal and ``T = X X^^T`` in hermitian coordinates.  A candidate
    whose hatted part is dependent must have a dependent real part (within
    ``tol``), and vice versa.  Observable functionals are compared on every
    accepted pair.  Controllability of ``sys_hat`` guarantees the hatted
    span reaches ``d**2``.

    Returns
    -------
    EquivalenceResult
        With a :class:`SimilarityCertificate` on success or an
        :class:`InequivalenceWitness` on refusal.
    """
    if sys_real.dim != sys_hat.dim:
        raise ValueError("systems have different dimensions")
    if (sys_real.n_controls, sys_real.n_observables) != (sys_hat.n_controls, sys_hat.n_observables):
        raise ValueError("systems differ in number of controls or observables")
    if check_controllable and not is_controllable(sys_hat):
        raise NotControllableError("the estimated system is not controllable")

    d = sys_real.dim
    n = d * d
    L_real, M_real, r_real = _coords_map(sys_real)
    L_hat, M_hat, r_hat = _coords_map(sys_hat)
    n_letters = len(L_real)
    lnorm = [max(np.linalg.norm(a, 2), np.linalg.norm(b, 2), 1.0) for a, b in zip(L_real, L_hat)]

    Qh = np.zeros((n, n))
    Qr = np.zeros((n, n))
    labels: list[tuple[int, ...]] = []
    pairing = []
    k = 0

    def check_observables(j: int, alpha) -> InequivalenceWitness | None:
        for ell in range(M_real.shape[0]):
            vh = M_hat[ell] @ Qh[:, j]
            vr = M_real[ell] @ Qr[:, j]
            scale = max(np.linalg.norm(M_real[ell]), np.linalg.norm(M_hat[ell]), 1.0)
            if abs(vh - vr) > tol * scale:
                return InequivalenceWitness(
                    kind="observable",
                    alpha=tuple(alpha),
                    observable=ell,
                    detail=(
                        f"moment differs: {moment(sys_real, ell, alpha):.12g} vs "
                        f"{moment(sys_hat, ell, alpha):.12g}"
                    ),
                    violation=float(abs(vh - vr)),
                )
        return None

    def offer(xh: np.ndarray, xr: np.ndarray, alpha) -> InequivalenceWitness | None:
        nonlocal k
        nh = np.linalg.norm(xh)
        nr = np.linalg.norm(xr)
        c = np.zeros(k)
        rh, rr = xh.copy(), xr.copy()
        for _ in range(2):
            dc = Qh[:, :k].T @ rh
            c += dc
            rh = rh - Qh[:, :k] @ dc
            rr = rr - Qr[:, :k] @ dc
        # inputs are normalized to norm <= 1, so 1 is the floor for roundoff zeros
        hat_dep = np.linalg.norm(rh) <= tau_rank * max(nh, 1.0)
        # dependence of the real vector on the real span, independent of c
        if k:
            cr, *_ = np.linalg.lstsq(Qr[:, :k], xr, rcond=None)
            real_res = np.linalg.norm(xr - Qr[:, :k] @ cr)
        else:
            real_res = nr
        real_dep = real_res <= tau_rank * max(nr, 1.0)
        if hat_dep:
            viol = np.linalg.norm(rr)
            if viol > tol * max(nr, nh, 1.0):
                return InequivalenceWitness(
                    kind="dependency",
                    alpha=tuple(alpha),
                    detail="linear relation holds for the estimated system but not the real one",
                    violation=float(viol),
                    coefficients=c,
                )
            return None
        if real_dep:
            return InequivalenceWitness(
                kind="dependency",
                alpha=tuple(alpha),
                detail="linear relation holds for the real system but not the estimated one",
                violation=float(np.linalg.norm(rh)),
                coefficients=cr if k else np.zeros(0),
            )
        s = 1.0 / np.linalg.norm(rh)
        Qh[:, k] = rh * s
        Qr[:, k] = rr * s
        labels.append(tuple(alpha))
        pairing.append((tuple(alpha), np.append(-c * s, s)))
        k += 1
        return check_observables(k - 1, alpha)

    w = offer(r_hat, r_real, ())
    if w is not None:
        return EquivalenceResult(False, witness=w)
    head = 0
    while head < k:
        xh, xr, alpha = Qh[:, head].copy(), Qr[:, head].copy(), labels[head]
        for a in range(n_letters):
            w = offer(L_hat[a] @ xh / lnorm[a], L_real[a] @ xr / lnorm[a], alpha + (a,))
            if w is not None:
                return EquivalenceResult(False, witness=w)
        head += 1
    if k < n:
        raise SaturationError(f"hatted Krylov span saturated at {k} < {n}")

    # T in coordinates, then as a superoperator on row-stacked vectors
    Tc = Qr @ Qh.T
    B = hermitian_basis(d).reshape(n, n).T  # columns are vec(G_j)
    T = B @ Tc @ B.conj().T
    residual = similarity_residual(T, sys_real, sys_hat)
    if residual > tol:
        w = InequivalenceWitness(
            kind="similarity",
            alpha=(),
            detail=f"assembled similarity violates the intertwining relations by {residual:.3e}",
            violation=residual,
        )
        return EquivalenceResult(False, witness=w)
    try:
        U = extract_unitary(T, unitary_tol)
    except RankOneError:
        U = None
    cert = SimilarityCertificate(T=T, pairing=pairing, residual=residual, unitary=U)
    return EquivalenceResult(True, certificate=cert)


@dataclass(frozen=True)
class CommutantBasis:
    """Hermitian solutions ``X`` of ``[X, A] = 0`` for every known operator.

    ``basis`` has shape ``(m, d, d)`` and is orthonormal under the
    Hilbert-Schmidt inner product.  ``residual_gauge_dim`` is ``m - 1``: the
    identity only contributes a global phase.
    """

    known_ops: tuple[np.ndarray, ...]
    basis: np.ndarray
    constraint_rank: int

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def residual_gauge_dim(self) -> int:
        return self.dim - 1


def _rank_tol(s: np.ndarray, shape) -> float:
    if s.size == 0:
        return 0.0
    return max(max(shape) * np.finfo(float).eps, 1e-9) * s[0]


def commutant(known_ops) -> CommutantBasis:
    """Hermitian commutant of ``known_ops`` by a null-space computation.

    The constraint ``[X, A] = 0`` is written in the real coordinates of the
    hermitian basis, real and imaginary parts stacked, and its null space is
    taken from the SVD with threshold ``max(max(shape) * eps, 1e-9) * s_max``.
    """
    ops = [np.asarray(A, dtype=complex) for A in known_ops]
    if not ops:
        raise ValueError("commutant needs at least one known operator")
    d = ops[0].shape[0]
    for j, A in enumerate(ops):
        if A.shape != (d, d):
            raise ValueError(f"operator {j} has shape {A.shape}, expected {(d, d)}")
    G = hermitian_basis(d)
    blocks = []
    for A in ops:
        cols = np.array([commutator(g, A).reshape(-1) for g in G]).T
        blocks.extend([cols.real, cols.imag])
    C = np.vstack(blocks)
    _, s, vh = np.linalg.svd(C)
    tol = _rank_tol(s, C.shape)
    rank = int(np.sum(s > tol))
    null = vh[rank:]
    basis = np.tensordot(null, G, axes=1)
    return CommutantBasis(known_ops=tuple(ops), basis=basis, constraint_rank=rank)


@dataclass
class KnownMask:
    """Which components of a system are known a priori."""

    drift: bool = False
    controls: tuple[bool, ...] = ()
    observables: tuple[bool, ...] = ()
    initial_state: bool = False

    @classmethod
    def all_known(cls, system: QuantumSystem) -> "KnownMask":
        return cls(
            True, (True,) * system.n_controls, (True,) * system.n_observables, True
        )

    def select(self, system: QuantumSystem) -> list[np.ndarray]:
        if len(self.controls) not in (0, system.n_controls):
            raise ValueError("control mask length does not match the system")
        if len(self.observables) not in (0, system.n_observables):
            raise ValueError("observable mask length does not match the system")
        ops = []
        if self.drift:
            ops.append(system.drift)
        ops += [H for H, m in zip(system.controls, self.controls) if m]
        ops += [M for M, m in zip(system.observables, self.observables) if m]
        if self.initial_state:
            ops.append(system.initial_state)
        return ops


@dataclass(frozen=True)
class IdentifiabilityReport:
    residual_gauge_dim: int
    commutant: CommutantBasis | None
    fully_identifiable: bool
    n_known: int = field(default=0)


def identifiability_report(
    system: QuantumSystem, known: KnownMask, check_controllable: bool = True
) -> IdentifiabilityReport:
    """Dimension of the unitaries left undetermined by the known components.

    With nothing known the full ``d**2 - 1`` is reported.
    """
    if check_controllable and not is_controllable(system):
        raise NotControllableError("identifiability analysis requires a controllable system")
    ops = known.select(system)
    if not ops:
        return IdentifiabilityReport(system.dim**2 - 1, None, system.dim == 1, 0)
    for A in ops:
        assert is_hermitian(A)
    cb = commutant(ops)
    return IdentifiabilityReport(cb.residual_gauge_dim, cb, cb.residual_gauge_dim == 0, len(ops))


def complete_basis_check(cb: CommutantBasis) -> int:
    """Null-space dimension of the complex commutation system, for cross-checks."""
    d = cb.basis.shape[1] if cb.dim else cb.known_ops[0].shape[0]
    eye = np.eye(d)
    C = np.vstack([np.kron(A, eye) - np.kron(eye, A.T) for A in cb.known_ops])
    return scipy.linalg.null_space(C, rcond=_rank_tol(np.array([1.0]), C.shape)).shape[1]

"""The controlled quantum system ``{H0, Hk, Ml, rho0}``."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from qsysid.operators import (
    TAU_STRUCT,
    is_density,
    is_hermitian,
    is_traceless,
    is_unitary,
    liouvillian,
)


def _as_matrix(A, path: str, d: int | None) -> np.ndarray:
    M = np.array(A, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{path}: expected a square matrix, got shape {M.shape}")
    if d is not None and M.shape[0] != d:
        raise ValueError(f"{path}: expected dimension {d}, got {M.shape[0]}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{path}: non-finite entries")
    M.setflags(write=False)
    return M


def _proportional_to_identity(A: np.ndarray, tol: float) -> bool:
    d = A.shape[0]
    dev = A - (np.trace(A) / d) * np.eye(d)
    return bool(np.linalg.norm(dev) <= tol * max(np.linalg.norm(A), 1e-300))


@dataclass(frozen=True)
class QuantumSystem:
    """Drift, controls, observables and initial state of a closed system.

    Validation happens on construction; violations raise ``ValueError`` with
    the offending field path (``"controls[1]"``, ``"observables[0]"``, ...).
    Observables and the initial state must not be multiples of the identity.
    """

    drift: np.ndarray
    controls: tuple[np.ndarray, ...] = ()
    observables: tuple[np.ndarray, ...] = ()
    initial_state: np.ndarray = field(default=None)  # type: ignore[assignment]
    tol: float = TAU_STRUCT

    def __post_init__(self):
        drift = _as_matrix(self.drift, "drift", None)
        d = drift.shape[0]
        controls = tuple(_as_matrix(H, f"controls[{k}]", d) for k, H in enumerate(self.controls))
        observables = tuple(
            _as_matrix(M, f"observables[{l}]", d) for l, M in enumerate(self.observables)
        )
        if self.initial_state is None:
            raise ValueError("initial_state: missing")
        rho = _as_matrix(self.initial_state, "initial_state", d)

        for path, H in [("drift", drift)] + [(f"controls[{k}]", H) for k, H in enumerate(controls)]:
            if not is_hermitian(H, self.tol):
                raise ValueError(f"{path}: not hermitian")
            if not is_traceless(H, self.tol):
                raise ValueError(f"{path}: not traceless")
        for l, M in enumerate(observables):
            if not is_hermitian(M, self.tol):
                raise ValueError(f"observables[{l}]: not hermitian")
            if _proportional_to_identity(M, self.tol):
                raise ValueError(f"observables[{l}]: proportional to the identity")
        if not is_density(rho, self.tol):
            raise ValueError("initial_state: not a density matrix")
        if _proportional_to_identity(rho, self.tol):
            raise ValueError("initial_state: proportional to the identity")

        object.__setattr__(self, "drift", drift)
        object.__setattr__(self, "controls", controls)
        object.__setattr__(self, "observables", observables)
        object.__setattr__(self, "initial_state", rho)

    @property
    def dim(self) -> int:
        return self.drift.shape[0]

    @property
    def n_controls(self) -> int:
        return len(self.controls)

    @property
    def n_observables(self) -> int:
        return len(self.observables)

    @property
    def hamiltonians(self) -> tuple[np.ndarray, ...]:
        """``(H0, H1, ..., H_Ni)``, indexed like multi-index entries."""
        return (self.drift,) + self.controls

    def liouvillians(self) -> list[np.ndarray]:
        return [liouvillian(H) for H in self.hamiltonians]

    def equal_to(self, other: "QuantumSystem") -> bool:
        """Bitwise equality of all matrices."""
        if (self.n_controls, self.n_observables) != (other.n_controls, other.n_observables):
            return False
        pairs = zip(
            self.hamiltonians + self.observables + (self.initial_state,),
            other.hamiltonians + other.observables + (other.initial_state,),
        )
        return all(np.array_equal(a, b) for a, b in pairs)


def conjugate_system(system: QuantumSystem, U: np.ndarray) -> QuantumSystem:
    """Return the system with every component replaced by ``U X U^dagger``.

    Raises
    ------
    ValueError
        If ``U`` is not unitary or has the wrong dimension.
    """
    U = np.asarray(U, dtype=complex)
    if U.shape != (system.dim, system.dim):
        raise ValueError(f"unitary shape {U.shape} does not match dimension {system.dim}")
    if not is_unitary(U, 1e-8):
        raise ValueError("conjugate_system requires a unitary")
    Ud = U.conj().T

    def conj(X):
        Y = U @ X @ Ud
        return 0.5 * (Y + Y.conj().T)

    return QuantumSystem(
        drift=conj(system.drift),
        controls=tuple(conj(H) for H in system.controls),
        observables=tuple(conj(M) for M in system.observables),
        initial_state=conj(system.initial_state),
        tol=system.tol,
    )

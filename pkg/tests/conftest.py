import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qsysid.operators import (  # noqa: E402
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    embed,
    random_hermitian,
    random_pure_state,
)
from qsysid.system import QuantumSystem  # noqa: E402

DATA = Path(__file__).parents[1] / "src" / "qsysid" / "data"

X1, Y1, Z1 = (embed(P, 0, 2) for P in (PAULI_X, PAULI_Y, PAULI_Z))
X2, Y2, Z2 = (embed(P, 1, 2) for P in (PAULI_X, PAULI_Y, PAULI_Z))
HEISENBERG = X1 @ X2 + Y1 @ Y2 + Z1 @ Z2
SINGLET = np.array([0, 1, -1, 0]) / np.sqrt(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


def random_system(d, rng, n_controls=1, n_observables=1):
    return QuantumSystem(
        drift=random_hermitian(d, rng),
        controls=tuple(random_hermitian(d, rng) for _ in range(n_controls)),
        observables=tuple(random_hermitian(d, rng, traceless=False) for _ in range(n_observables)),
        initial_state=random_pure_state(d, rng),
    )


def two_qubit_system(measurement=None):
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1
    M = Z1 if measurement is None else measurement
    return QuantumSystem(HEISENBERG, (X1, Y1), (M,), rho)


def random_coupling(rng):
    return rng.uniform(0.5, 1.5) * np.exp(2j * np.pi * rng.random())


def random_connected_edges(n, rng, p=0.5):
    """Random spanning tree plus extra edges with probability ``p``."""
    order = rng.permutation(n)
    edges = set()
    for j in range(1, n):
        a, b = int(order[j]), int(order[rng.integers(j)])
        edges.add((min(a, b), max(a, b)))
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < p:
                edges.add((a, b))
    return sorted(edges)


ACCEPTANCE_LINES = []


def acceptance(number, ok, detail):
    """Record and print one acceptance verdict line, then assert it."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

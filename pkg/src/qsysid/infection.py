"""Coupling topologies, the infection (zero-forcing) rule and its controllability link.

Nodes are 0-based.  A topology carries the edge couplings ``c_nm`` of

    H0 = sum_{(n, m) in E} c_nm |n><m| + h.c.

stored once per undirected edge with ``n < m``, a control set ``C`` (each
controlled node contributes ``H_k = |k><k|``) and one measured node in ``C``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from qsysid._kernels import infect_kernel
from qsysid.lie import TAU_RANK, lie_closure
from qsysid.operators import projector, traceless_part
from qsysid.system import QuantumSystem

DEFAULT_NODE_CAP = 16


@dataclass(frozen=True)
class Topology:
    n_nodes: int
    couplings: dict[tuple[int, int], complex]
    control_set: frozenset[int] = frozenset()
    measured_node: int | None = None

    def __post_init__(self):
        n = self.n_nodes
        if n < 1:
            raise ValueError("topology needs at least one node")
        canon: dict[tuple[int, int], complex] = {}
        for (a, b), c in self.couplings.items():
            a, b, c = int(a), int(b), complex(c)
            if a == b:
                raise ValueError(f"self-loop on node {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) references a node outside 0..{n - 1}")
            if c == 0:
                raise ValueError(f"edge ({a}, {b}) has zero coupling")
            if a > b:
                a, b, c = b, a, c.conjugate()
            if (a, b) in canon:
                raise ValueError(f"duplicate edge ({a}, {b})")
            canon[(a, b)] = c
        C = frozenset(int(v) for v in self.control_set)
        if any(not 0 <= v < n for v in C):
            raise ValueError("control set references a node outside the graph")
        if self.measured_node is not None and self.measured_node not in C:
            raise ValueError("measured node must belong to the control set")
        object.__setattr__(self, "couplings", dict(sorted(canon.items())))
        object.__setattr__(self, "control_set", C)

    @classmethod
    def from_edges(
        cls,
        n_nodes: int,
        edges: Iterable,
        control_set: Iterable[int] = (),
        measured_node: int | None = None,
    ) -> "Topology":
        """Build from ``(n, m)`` pairs (unit coupling) or ``(n, m, c)`` triples."""
        couplings = {}
        for e in edges:
            a, b = int(e[0]), int(e[1])
            c = complex(e[2]) if len(e) > 2 else 1.0
            key = (a, b) if a < b else (b, a)
            if key in couplings:
                raise ValueError(f"duplicate edge {key}")
            couplings[key] = c if a < b else complex(c).conjugate()
        C = frozenset(control_set)
        if measured_node is None and C:
            measured_node = min(C)
        return cls(n_nodes, couplings, C, measured_node)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return list(self.couplings)

    def neighbors(self, v: int) -> list[int]:
        out = [b for (a, b) in self.couplings if a == v] + [a for (a, b) in self.couplings if b == v]
        return sorted(out)

    def adjacency_masks(self) -> list[int]:
        adj = [0] * self.n_nodes
        for a, b in self.couplings:
            adj[a] |= 1 << b
            adj[b] |= 1 << a
        return adj

    def with_couplings(self, couplings: dict[tuple[int, int], complex]) -> "Topology":
        if set(couplings) != set(self.couplings):
            raise ValueError("coupling map must cover exactly the topology's edges")
        return Topology(self.n_nodes, couplings, self.control_set, self.measured_node)

    def with_control_set(self, control_set, measured_node=None) -> "Topology":
        C = frozenset(control_set)
        if measured_node is None and C:
            measured_node = min(C)
        return Topology(self.n_nodes, self.couplings, C, measured_node)

    def hamiltonian(self) -> np.ndarray:
        H = np.zeros((self.n_nodes, self.n_nodes), dtype=complex)
        for (a, b), c in self.couplings.items():
            H[a, b] = c
            H[b, a] = c.conjugate()
        return H

    def is_connected(self) -> bool:
        if self.n_nodes == 0:
            return True
        adj = self.adjacency_masks()
        seen, frontier = 1, 1
        while frontier:
            nxt = 0
            v = 0
            f = frontier
            while f:
                if f & 1:
                    nxt |= adj[v]
                f >>= 1
                v += 1
            frontier = nxt & ~seen
            seen |= nxt
        return seen == (1 << self.n_nodes) - 1


def path_edges(n: int) -> list[tuple[int, int]]:
    return [(j, j + 1) for j in range(n - 1)]


def cycle_edges(n: int) -> list[tuple[int, int]]:
    return path_edges(n) + [(0, n - 1)]


def complete_edges(n: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(n) for b in range(a + 1, n)]


def star_edges(n_leaves: int) -> list[tuple[int, int]]:
    """Star with center 0 and leaves ``1..n_leaves``."""
    return [(0, j) for j in range(1, n_leaves + 1)]


def _mask(nodes: Iterable[int]) -> int:
    m = 0
    for v in nodes:
        m |= 1 << v
    return m


def _unmask(mask: int) -> frozenset[int]:
    return frozenset(v for v in range(mask.bit_length()) if (mask >> v) & 1)


@dataclass(frozen=True)
class InfectionTrace:
    """Infection steps as ``(new_node, infecting_node)`` plus the final set."""

    steps: tuple[tuple[int, int], ...]
    final_infected: frozenset[int]
    n_nodes: int = 0

    @property
    def complete(self) -> bool:
        return len(self.final_infected) == self.n_nodes


def infect(topology: Topology, control_set: Iterable[int] | None = None) -> InfectionTrace:
    """Run the infection rules from ``control_set`` (default: the topology's).

    Rule: an infected node whose neighbourhood contains exactly one healthy
    node infects it.  The final set does not depend on the order in which
    rules fire; the recorded order always fires the lowest-index eligible
    infected node first.
    """
    C = topology.control_set if control_set is None else frozenset(control_set)
    adj = topology.adjacency_masks()
    infected = _mask(C)
    steps = []
    while True:
        for v in range(topology.n_nodes):
            if not (infected >> v) & 1:
                continue
            healthy = adj[v] & ~infected
            if healthy and not healthy & (healthy - 1):
                u = healthy.bit_length() - 1
                steps.append((u, v))
                infected |= healthy
                break
        else:
            break
    return InfectionTrace(tuple(steps), _unmask(infected), topology.n_nodes)


def infected_closure(topology: Topology, control_set: Iterable[int]) -> frozenset[int]:
    """Final infected set, computed by the selected kernel backend."""
    return _unmask(infect_kernel.propagate(topology.adjacency_masks(), _mask(control_set)))


def is_infecting(topology: Topology, control_set: Iterable[int] | None = None) -> bool:
    C = topology.control_set if control_set is None else frozenset(control_set)
    full = (1 << topology.n_nodes) - 1
    return infect_kernel.propagate(topology.adjacency_masks(), _mask(C)) == full


def minimal_infecting_set(topology: Topology, node_cap: int = DEFAULT_NODE_CAP) -> frozenset[int]:
    """Smallest infecting set by exhaustive search, lexicographically first on ties.

    Subsets are scanned by increasing size; within a size, in lexicographic
    order of their sorted node tuples.  The control set of ``topology`` is
    ignored.

    Raises
    ------
    ValueError
        If the graph has more than ``node_cap`` nodes.
    """
    n = topology.n_nodes
    if n > node_cap:
        raise ValueError(f"{n} nodes exceed the exhaustive-search cap of {node_cap}")
    adj = topology.adjacency_masks()
    for size in range(n + 1):
        mask = infect_kernel.first_infecting_subset(adj, size)
        if mask >= 0:
            return _unmask(mask)
    raise AssertionError("the full node set is always infecting")


def control_projectors(topology: Topology) -> list[np.ndarray]:
    """Bare projectors ``|k><k|`` for the controlled nodes, in ascending order."""
    return [projector(k, topology.n_nodes) for k in sorted(topology.control_set)]


def build_system(topology: Topology, initial_state: np.ndarray | None = None) -> QuantumSystem:
    """Quantum system of a topology with node controls and one measured node.

    Controls are the traceless parts ``|k><k| - I/d`` (shifting by the
    identity changes no commutator); the observable is the bare projector on
    the measured node, which is also the default initial state.
    """
    if topology.measured_node is None:
        raise ValueError("topology has no measured node")
    d = topology.n_nodes
    P = projector(topology.measured_node, d)
    rho0 = P if initial_state is None else np.asarray(initial_state, dtype=complex)
    return QuantumSystem(
        drift=topology.hamiltonian(),
        controls=tuple(traceless_part(P_k) for P_k in control_projectors(topology)),
        observables=(P,),
        initial_state=rho0,
    )


def neighbor_form(topology: Topology, k: int) -> np.ndarray:
    """Closed form ``i sum_{m in n(k)} (c_km |k><m| + c_mk |m><k|)``."""
    H = topology.hamiltonian()
    out = np.zeros_like(H)
    for m in topology.neighbors(k):
        out[k, m] += H[k, m]
        out[m, k] += H[m, k]
    return 1j * out


def double_commutator(topology: Topology, k: int, m: int | None = None) -> np.ndarray:
    """``[[i P_m, i H0], i P_k]`` with bare projectors (``m`` defaults to ``k``)."""
    d = topology.n_nodes
    m = k if m is None else m
    iPk, iPm, iH = 1j * projector(k, d), 1j * projector(m, d), 1j * topology.hamiltonian()
    inner = iPm @ iH - iH @ iPm
    return inner @ iPk - iPk @ inner


@dataclass(frozen=True)
class InfectionControllability:
    """Outcome of the infection-implies-controllability check.

    ``ladder`` maps each intermediate identity of the commutator construction
    to its Frobenius error; it is empty when the control set already holds
    every node.
    """

    controllable: bool
    closure_dim: int
    full_dim: int
    ladder: dict[str, float] = field(default_factory=dict)
    first_step: tuple[int, int] | None = None

    def __bool__(self) -> bool:
        return self.controllable


def verify_infection_controllability(
    topology: Topology, tau_rank: float = TAU_RANK, ladder_tol: float = 1e-10
) -> InfectionControllability:
    """Check the controllability claim for an infecting topology.

    Computes the Lie closure of ``{i H0, i P_k}`` and replays the first rung
    of the commutator ladder: for the controlled node ``k`` with a unique
    healthy neighbour ``l``, the double commutator matches its closed form,
    the terms from controlled neighbours cancel everything but the ``(k, l)``
    coupling, and the resulting ``i|l><l|`` lies in the closure.
    """
    if not is_infecting(topology):
        raise ValueError("control set does not infect the graph")
    d = topology.n_nodes
    gens = [topology.hamiltonian()] + control_projectors(topology)
    basis = lie_closure(gens, tau_rank)
    full = d * d - 1

    ladder: dict[str, float] = {}
    first = None
    trace = infect(topology)
    if trace.steps:
        ell, k = trace.steps[0]
        first = (k, ell)
        C = topology.control_set
        H = topology.hamiltonian()
        iPk = 1j * projector(k, d)
        ladder["neighbor_form"] = float(np.linalg.norm(double_commutator(topology, k) - neighbor_form(topology, k)))

        A = double_commutator(topology, k)
        worst_single = 0.0
        for m in topology.neighbors(k):
            if m in C:
                term = double_commutator(topology, k, m)
                expect = np.zeros((d, d), dtype=complex)
                expect[k, m], expect[m, k] = H[k, m], H[m, k]
                worst_single = max(worst_single, float(np.linalg.norm(term + 1j * expect)))
                A = A + term
        ladder["controlled_neighbor_terms"] = worst_single
        isolated = np.zeros((d, d), dtype=complex)
        isolated[k, ell], isolated[ell, k] = H[k, ell], H[ell, k]
        ladder["isolated_coupling"] = float(np.linalg.norm(A - 1j * isolated))

        B = A @ iPk - iPk @ A
        expect_B = np.zeros((d, d), dtype=complex)
        expect_B[k, ell], expect_B[ell, k] = H[k, ell], -H[ell, k]
        ladder["rotated_coupling"] = float(np.linalg.norm(B - expect_B))

        D = A @ B - B @ A
        c2 = abs(H[k, ell]) ** 2
        D = D + 2 * c2 * iPk  # remove the component along i|k><k|
        target = 2j * c2 * projector(ell, d)
        ladder["new_projector"] = float(np.linalg.norm(D - target))
        ladder["projector_in_closure"] = basis.residual(traceless_part(1j * projector(ell, d)))

    ok_ladder = all(err <= ladder_tol * max(1.0, np.linalg.norm(topology.hamiltonian()) ** 2)
                    for err in ladder.values())
    return InfectionControllability(
        controllable=basis.dim == full and ok_ladder,
        closure_dim=basis.dim,
        full_dim=full,
        ladder=ladder,
        first_step=first,
    )

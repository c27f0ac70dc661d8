"""Independent reference computations used only by the tests.

Each oracle deliberately takes a different route from the library code it
checks: plain spanning sets and SVD ranks instead of Gram-Schmidt, Python
sets instead of bitmasks, Kronecker null spaces instead of real coordinates.
"""

import itertools

import numpy as np
import scipy.linalg


def _real_rows(mats):
    return np.array([np.concatenate([M.real.ravel(), M.imag.ravel()]) for M in mats])


def naive_closure_dim(generators, max_rounds=64):
    """Dimension of the real Lie algebra generated by i*H, from raw spanning sets."""
    d = generators[0].shape[0]
    span = []
    for H in generators:
        A = 1j * (H - np.trace(H) / d * np.eye(d))
        if np.linalg.norm(A) > 1e-12 and _rank(span + [A]) > len(span):
            span.append(A)
    full = d * d - 1
    for _ in range(max_rounds):
        grew = False
        for A, B in itertools.product(list(span), repeat=2):
            C = A @ B - B @ A
            if np.linalg.norm(C) < 1e-12:
                continue
            C = C / np.linalg.norm(C)
            if _rank(span + [C]) > len(span):
                span.append(C)
                grew = True
            if len(span) == full:
                return full
        if not grew:
            break
    return len(span)


def _rank(mats):
    if not mats:
        return 0
    return int(np.linalg.matrix_rank(_real_rows(mats), tol=1e-9 * max(1.0, np.linalg.norm(_real_rows(mats), 2))))


def commutant_dim(ops):
    """Complex dimension of {X : [X, A] = 0 for all A} via Kronecker null space."""
    d = ops[0].shape[0]
    eye = np.eye(d)
    C = np.vstack([np.kron(A, eye) - np.kron(eye, A.T) for A in ops])
    return scipy.linalg.null_space(C, rcond=1e-9).shape[1]


def naive_infect(n, edges, C, rng=None):
    """Infection fixed point with sets, firing eligible nodes in random order."""
    nbrs = {v: set() for v in range(n)}
    for a, b in edges:
        nbrs[a].add(b)
        nbrs[b].add(a)
    infected = set(C)
    while True:
        eligible = [v for v in infected if len(nbrs[v] - infected) == 1]
        if not eligible:
            return infected
        v = eligible[rng.integers(len(eligible))] if rng is not None else min(eligible)
        infected |= nbrs[v] - infected


def brute_force_min_infecting(n, edges):
    for size in range(n + 1):
        for combo in itertools.combinations(range(n), size):
            if len(naive_infect(n, edges, combo)) == n:
                return set(combo)
    raise AssertionError


def nested_commutator_moment(Hs, M, rho, alpha):
    """tr{M L_alpha rho} with L_a X = -i(H_a X - X H_a), written out explicitly."""
    X = rho
    for a in alpha:
        X = -1j * (Hs[a] @ X - X @ Hs[a])
    return np.trace(M @ X)

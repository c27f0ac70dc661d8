"""Pure-Python zero-forcing kernels on bitmask adjacency lists.

``adj[v]`` is an integer whose bit ``u`` is set iff ``u`` neighbours ``v``.
"""

from itertools import combinations


def propagate(adj, start):
    """Closure of ``start`` under the single-healthy-neighbour rule."""
    infected = start
    changed = True
    while changed:
        changed = False
        v = 0
        rest = infected
        while rest:
            if rest & 1:
                healthy = adj[v] & ~infected
                if healthy and not healthy & (healthy - 1):
                    infected |= healthy
                    changed = True
            rest >>= 1
            v += 1
    return infected


def first_infecting_subset(adj, size):
    """Lexicographically first ``size``-subset whose closure is everything, else -1."""
    n = len(adj)
    full = (1 << n) - 1
    for combo in combinations(range(n), size):
        mask = 0
        for v in combo:
            mask |= 1 << v
        if propagate(adj, mask) == full:
            return mask
    return -1


def count_infecting(adj, size):
    n = len(adj)
    full = (1 << n) - 1
    total = 0
    for combo in combinations(range(n), size):
        mask = 0
        for v in combo:
            mask |= 1 << v
        if propagate(adj, mask) == full:
            total += 1
    return total

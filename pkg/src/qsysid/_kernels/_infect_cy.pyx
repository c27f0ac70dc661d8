# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled zero-forcing kernels; same contract as ``_infect_py``."""

from libc.stdlib cimport malloc, free
from libc.stdint cimport uint64_t

cdef enum:
    MAX_NODES = 63


cdef inline bint _single_bit(uint64_t x) nogil:
    return x != 0 and (x & (x - 1)) == 0


cdef uint64_t _propagate(const uint64_t* adj, int n, uint64_t infected) nogil:
    cdef bint changed = True
    cdef int v
    cdef uint64_t healthy
    while changed:
        changed = False
        for v in range(n):
            if (infected >> v) & 1:
                healthy = adj[v] & ~infected
                if _single_bit(healthy):
                    infected |= healthy
                    changed = True
    return infected


cdef uint64_t* _load(adj, int* n_out) except NULL:
    cdef int n = len(adj)
    if n > MAX_NODES:
        raise ValueError(f"compiled kernel supports at most {MAX_NODES} nodes")
    cdef uint64_t* buf = <uint64_t*> malloc(max(n, 1) * sizeof(uint64_t))
    if buf == NULL:
        raise MemoryError()
    for i in range(n):
        buf[i] = <uint64_t> adj[i]
    n_out[0] = n
    return buf


def propagate(adj, start):
    cdef int n
    cdef uint64_t* buf = _load(adj, &n)
    cdef uint64_t out
    try:
        out = _propagate(buf, n, <uint64_t> start)
    finally:
        free(buf)
    return int(out)


cdef long long _scan(const uint64_t* adj, int n, int size, bint count_all) nogil:
    # iterate size-subsets in lexicographic order via an index array
    cdef int idx[MAX_NODES]
    cdef int i, j
    cdef uint64_t full = ((<uint64_t> 1) << n) - 1
    cdef uint64_t mask
    cdef long long total = 0
    if size > n:
        return 0 if count_all else -1
    for i in range(size):
        idx[i] = i
    while True:
        mask = 0
        for i in range(size):
            mask |= (<uint64_t> 1) << idx[i]
        if _propagate(adj, n, mask) == full:
            if not count_all:
                return <long long> mask
            total += 1
        i = size - 1
        while i >= 0 and idx[i] == n - size + i:
            i -= 1
        if i < 0:
            break
        idx[i] += 1
        for j in range(i + 1, size):
            idx[j] = idx[j - 1] + 1
    return total if count_all else -1


def first_infecting_subset(adj, int size):
    cdef int n
    cdef uint64_t* buf = _load(adj, &n)
    cdef long long out
    try:
        with nogil:
            out = _scan(buf, n, size, False)
    finally:
        free(buf)
    return int(out)


def count_infecting(adj, int size):
    cdef int n
    cdef uint64_t* buf = _load(adj, &n)
    cdef long long out
    try:
        with nogil:
            out = _scan(buf, n, size, True)
    finally:
        free(buf)
    return int(out)

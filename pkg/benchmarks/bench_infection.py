"""Time the minimal infecting set search with each kernel backend.

Usage: python benchmarks/bench_infection.py [--sizes 12 14 16] [--repeat 3]
"""

import argparse
import time

import numpy as np

import qsysid.infection as infection
from qsysid._kernels import available_backends
from qsysid.infection import Topology, complete_edges, cycle_edges


def random_graph(n, rng, p=0.3):
    edges = [(j, int(rng.integers(j))) for j in range(1, n)]
    edges += [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < p and (b, a) not in edges]
    return Topology.from_edges(n, sorted({(min(e), max(e)) for e in edges}))


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[12, 14, 16])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    backends = available_backends()
    rng = np.random.default_rng(args.seed)
    print(f"{'graph':<14}{'n':>4}" + "".join(f"{name:>12}" for name in backends) + f"{'speedup':>10}")
    for n in args.sizes:
        cases = [
            ("cycle", Topology.from_edges(n, cycle_edges(n))),
            ("complete", Topology.from_edges(n, complete_edges(n))),
            ("random", random_graph(n, rng)),
        ]
        for name, topo in cases:
            row, results = {}, set()
            for bname, kernel in backends.items():
                infection.infect_kernel = kernel
                dt, C = best_of(lambda: infection.minimal_infecting_set(topo, node_cap=n), args.repeat)
                row[bname] = dt
                results.add(frozenset(C))
            assert len(results) == 1, "backends disagree"
            speed = row["python"] / row["cython"] if "cython" in row else float("nan")
            print(f"{name:<14}{n:>4}" + "".join(f"{row[b]:>11.4f}s" for b in backends) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()

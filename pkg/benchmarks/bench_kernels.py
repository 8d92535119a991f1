"""Time each kernel under both backends on fixed inputs.

    python3 benchmarks/bench_kernels.py [--repeat N]

Both variants are called through ``kernels.IMPLEMENTATIONS`` so one process
measures both; the first numba call (compilation or cache load) is excluded.
"""

import argparse
import itertools
import timeit

import numpy as np

from mtcluster import kernels
from mtcluster.depgraph import DependencyGraph
from mtcluster.penrose import tuple_graph
from mtcluster.trees import labeled_tree_arrays, plane_tree_arrays


def cases():
    rng = np.random.default_rng(0)
    k5 = DependencyGraph.from_edges(5, itertools.combinations(range(5), 2))
    tg = tuple_graph((0, 1, 2, 3, 4, 0), k5)  # complete on 6 positions: 15 edges
    pairs = sorted(tg.edges)
    eu = np.array([a for a, _ in pairs], dtype=np.int64)
    ev = np.array([b for _, b in pairs], dtype=np.int64)

    path = DependencyGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    inc_tuple = path.incompat_matrix()[np.ix_([0, 1, 1, 2, 2, 3], [0, 1, 1, 2, 2, 3])]
    lp, ld, lr = labeled_tree_arrays(5)

    pp, pd, _ = plane_tree_arrays(8)
    rho = np.full(4, 0.1)

    n = 20
    g20 = DependencyGraph.from_edges(
        n, [e for e in itertools.combinations(range(n), 2) if rng.random() < 0.2])
    stars = np.array([g20.star_mask(x) for x in range(n)], dtype=np.int64)
    w = np.full(n, -0.05)

    trees = rng.integers(0, 1 << 20, 300).astype(np.int64)
    tops = trees | rng.integers(0, 1 << 20, 300).astype(np.int64)
    graphs = rng.integers(0, 1 << 20, 3000).astype(np.int64)

    return {
        "ursell_edge_sum (15 edges)": ("ursell_edge_sum", (6, eu, ev)),
        "count_penrose (1296 trees)": ("count_penrose", (lp, ld, lr, inc_tuple, True)),
        "tuple_weights (n=8, P4)": ("tuple_weights", (pp, pd, path.incompat_matrix(), rho, 1, True)),
        "xi_all_subsets (2^20)": ("xi_all_subsets", (n, stars, w)),
        "interval_counts (300x3000)": ("interval_counts", (trees, tops, graphs)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    names = list(kernels.IMPLEMENTATIONS)
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'kernel':32s}" + "".join(f"{b:>12s}" for b in names) + "     speedup")
    for label, (name, inputs) in cases().items():
        times = {}
        for b in names:
            fn = kernels.IMPLEMENTATIONS[b][name]
            fn(*inputs)  # warm-up
            times[b] = min(timeit.repeat(lambda: fn(*inputs), number=1, repeat=args.repeat))
        ratio = times["numpy"] / times["numba"] if "numba" in times else float("nan")
        print(f"{label:32s}" + "".join(f"{times[b] * 1e3:10.2f}ms" for b in names)
              + f"  {ratio:8.1f}x")


if __name__ == "__main__":
    main()

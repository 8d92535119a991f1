"""Exhaustive oracle checks run by ``mtcluster verify``.

Each family returns a :class:`FamilyResult`; failures carry the first
counterexample found.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass
from typing import Iterable

import networkx as nx
import numpy as np

from .depgraph import DependencyGraph
from .instances import hypergraph_coloring_to_lll, Hypergraph, random_ksat, sat_to_lll
from .mt_engine import collect_witness_stats, run_mt
from .penrose import (
    check_partition_scheme,
    penrose_count_of_graph,
    tuple_graph,
    ursell_of_graph,
)
from .trees import (
    count_unlabeled,
    enumerate_labeled_trees,
    enumerate_plane_trees,
    map_m,
    map_theta,
    preimage_size_of_m,
)


@dataclass
class FamilyResult:
    name: str
    passed: bool
    checked: int
    counterexample: dict | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def small_graphs(max_vertices: int = 5) -> list[DependencyGraph]:
    """One graph per isomorphism class on 1..max_vertices vertices."""
    out = []
    for h in nx.graph_atlas_g():
        if 1 <= h.number_of_nodes() <= max_vertices:
            out.append(DependencyGraph.from_edges(h.number_of_nodes(), h.edges()))
    return out


def random_small_graphs(count: int, seed: int, max_vertices: int = 5) -> list[DependencyGraph]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(1, max_vertices + 1))
        edges = [(i, j) for i, j in itertools.combinations(range(n), 2) if rng.random() < 0.5]
        out.append(DependencyGraph.from_edges(n, edges))
    return out


def all_tuples(g: DependencyGraph, max_n: int) -> Iterable[tuple[int, ...]]:
    for n in range(max_n + 1):
        yield from itertools.product(range(g.n_vertices), repeat=n + 1)


def check_ursell_identity(graphs, max_n: int = 4, check_t2: bool = True) -> FamilyResult:
    """Subgraph-sum Ursell coefficient equals the signed Penrose count."""
    checked = 0
    for gi, g in enumerate(graphs):
        for tup in all_tuples(g, max_n):
            tg = tuple_graph(tup, g)
            brute = ursell_of_graph(tg)
            pen = (-1) ** tg.n * penrose_count_of_graph(tg, check_t2)
            checked += 1
            if brute != pen:
                return FamilyResult("ursell_identity", False, checked, {
                    "graph_index": gi, "graph_edges": g.edges, "tuple": list(tup),
                    "ursell_brute": brute, "ursell_penrose": pen,
                })
    return FamilyResult("ursell_identity", True, checked)


def check_partition_scheme_family(graphs, max_n: int = 4) -> FamilyResult:
    checked = 0
    for gi, g in enumerate(graphs):
        for tup in all_tuples(g, max_n):
            res = check_partition_scheme(tuple_graph(tup, g))
            checked += 1
            if not res.ok:
                return FamilyResult("partition_scheme", False, checked, {
                    "graph_index": gi, "graph_edges": g.edges, "tuple": list(tup),
                    "detail": res.counterexample,
                })
    return FamilyResult("partition_scheme", True, checked)


def check_tree_counts(n_max: int = 6) -> FamilyResult:
    """Counts at four vertices, the m-preimage law and the m/theta round trip."""
    checked = 0
    counts = (
        len(list(enumerate_plane_trees(3))),
        len(list(enumerate_labeled_trees(3))),
        count_unlabeled(3),
    )
    checked += 1
    if counts != (5, 16, 4):
        return FamilyResult("tree_counts", False, checked, {"n": 3, "counts": list(counts)})
    for n in range(n_max + 1):
        plane = list(enumerate_plane_trees(n))
        total = sum(preimage_size_of_m(t) for t in plane)
        cayley = (n + 1) ** (n - 1) if n >= 1 else 1
        checked += 1
        if total != cayley:
            return FamilyResult("tree_counts", False, checked,
                                {"n": n, "preimage_sum": total, "expected": cayley})
        for t in plane:
            checked += 1
            if map_m(map_theta(t)) != t:
                return FamilyResult("tree_counts", False, checked,
                                    {"n": n, "tree": t.to_string(), "issue": "m(theta(t)) != t"})
    return FamilyResult("tree_counts", True, checked)


def check_witness_penrose(seed: int = 0, n_instances: int = 20, runs: int = 5) -> FamilyResult:
    """Witness trees from random k-SAT and hypergraph instances are all Penrose."""
    rng = np.random.default_rng(seed)
    checked = 0
    for k in range(n_instances):
        if k % 2 == 0:
            f = random_ksat(int(rng.integers(6, 12)), int(rng.integers(4, 12)), 3,
                            int(rng.integers(1 << 30)))
            m, events, g = sat_to_lll(f)
        else:
            nv = int(rng.integers(5, 10))
            edges = tuple(
                tuple(sorted(int(v) for v in rng.choice(nv, size=int(rng.integers(2, 4)), replace=False)))
                for _ in range(int(rng.integers(3, 8)))
            )
            m, events, g = hypergraph_coloring_to_lll(Hypergraph(nv, edges))
        for r in range(runs):
            rule = "lowest" if r % 2 == 0 else "random"
            log = run_mt(m, events, g, seed=int(rng.integers(1 << 30)), step_cap=2000, rule=rule)
            stats = collect_witness_stats(log, g, range(1, len(log.steps) + 1))
            checked += len(stats.entries)
            if not stats.all_penrose:
                bad = next(e for e in stats.entries if not e["penrose"])
                return FamilyResult("witness_penrose", False, checked,
                                    {"instance": k, "rule": rule, "entry": bad})
    return FamilyResult("witness_penrose", True, checked)


def run_suite(seed: int = 0, n_random: int = 200, max_vertices: int = 5, max_n: int = 4,
              mutate: bool = False) -> list[FamilyResult]:
    """All families.  ``mutate`` drops the younger-uncle Penrose condition."""
    graphs = small_graphs(max_vertices) + random_small_graphs(n_random, seed, max_vertices)
    return [
        check_tree_counts(),
        check_ursell_identity(graphs, max_n, check_t2=not mutate),
        check_partition_scheme_family(graphs, max_n),
        check_witness_penrose(seed),
    ]

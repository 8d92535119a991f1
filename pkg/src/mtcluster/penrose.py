"""Penrose trees, Ursell coefficients and the partition scheme (q, p).

A point tuple ``(x_0, ..., x_n)`` over a dependency graph induces a graph on
the positions ``0..n`` with an edge ``{i, j}`` whenever ``x_i`` and ``x_j``
are incompatible.  Everything in this module depends on the tuple only through
that graph, which is why the heavy functions are cached on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .depgraph import DependencyGraph, compatible
from .errors import CapExceededError, InvalidInstanceError
from .trees import LabeledRootedTree, enumerate_labeled_trees, labeled_tree_arrays

#: largest tuple length (n + 1) accepted by the exact Ursell routines
TUPLE_CAP = 8


@dataclass(frozen=True)
class TupleGraph:
    """Simple graph on the positions ``0 .. size-1``; edges are sorted pairs."""

    size: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        for i, j in self.edges:
            if not 0 <= i < j < self.size:
                raise InvalidInstanceError(f"bad edge {(i, j)} on {self.size} vertices")

    @property
    def n(self) -> int:
        return self.size - 1

    def adjacency_masks(self) -> list[int]:
        adj = [0] * self.size
        for i, j in self.edges:
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        return adj

    def matrix(self) -> np.ndarray:
        m = np.zeros((self.size, self.size), dtype=bool)
        for i, j in self.edges:
            m[i, j] = m[j, i] = True
        return m

    def depths(self) -> list[int] | None:
        """Distances from vertex 0, or None when the graph is disconnected."""
        adj = self.adjacency_masks()
        dep = [-1] * self.size
        dep[0] = 0
        frontier = [0]
        while frontier:
            nxt = []
            for v in frontier:
                for u in range(self.size):
                    if (adj[v] >> u) & 1 and dep[u] < 0:
                        dep[u] = dep[v] + 1
                        nxt.append(u)
            frontier = nxt
        return None if -1 in dep else dep

    def is_connected(self) -> bool:
        return self.depths() is not None


# a connected spanning subgraph of a tuple graph is represented the same way
GraphOnRootedVertices = TupleGraph


def tuple_graph(tup: Sequence[int], g: DependencyGraph) -> TupleGraph:
    _check_tuple(tup, g)
    edges = frozenset(
        (i, j)
        for i, j in combinations(range(len(tup)), 2)
        if not compatible(g, tup[i], tup[j])
    )
    return TupleGraph(len(tup), edges)


def _check_tuple(tup: Sequence[int], g: DependencyGraph) -> None:
    if len(tup) == 0:
        raise InvalidInstanceError("tuple must contain at least the root point")
    for x in tup:
        if not 0 <= x < g.n_vertices:
            raise InvalidInstanceError(f"tuple entry {x} outside the graph")


def is_penrose_pair(
    theta: LabeledRootedTree,
    tup: Sequence[int],
    g: DependencyGraph,
    check_t2: bool = True,
) -> bool:
    """Whether ``(theta, tup)`` is a Penrose tree.

    Tree edges must join incompatible points, points at equal depth must be
    compatible, and a point must be compatible with every vertex one level up
    that comes after its parent in plane-tree order.  ``check_t2=False``
    drops the last condition; it only exists for mutation testing.
    """
    if len(tup) != theta.size:
        raise InvalidInstanceError(
            f"tuple has {len(tup)} entries but the tree has {theta.size} vertices"
        )
    _check_tuple(tup, g)
    depth, ranks, par = theta.depth, theta.ranks, theta.parent
    for i, j in theta.edges:
        if compatible(g, tup[i], tup[j]):
            return False
    for i, j in combinations(range(theta.size), 2):
        if depth[i] == depth[j] and not compatible(g, tup[i], tup[j]):
            return False
    if check_t2:
        for i in range(1, theta.size):
            for j in range(theta.size):
                if (depth[j] == depth[i] - 1 and ranks[par[i]] < ranks[j]
                        and not compatible(g, tup[i], tup[j])):
                    return False
    return True


def _edge_arrays(tg: TupleGraph) -> tuple[np.ndarray, np.ndarray]:
    pairs = sorted(tg.edges)
    eu = np.array([p[0] for p in pairs], dtype=np.int64)
    ev = np.array([p[1] for p in pairs], dtype=np.int64)
    return eu, ev


def _require_cap(size: int) -> None:
    if size > TUPLE_CAP:
        raise CapExceededError(f"exact mode cap exceeded ({size} > {TUPLE_CAP} points)")


@lru_cache(maxsize=1 << 16)
def ursell_of_graph(tg: TupleGraph) -> int:
    """Signed count of connected spanning subgraphs of ``tg``."""
    _require_cap(tg.size)
    if not tg.is_connected():
        return 0
    eu, ev = _edge_arrays(tg)
    return int(kernels.ursell_edge_sum(tg.size, eu, ev))


@lru_cache(maxsize=1 << 16)
def penrose_count_of_graph(tg: TupleGraph, check_t2: bool = True) -> int:
    """Number of labeled trees that are Penrose for any tuple inducing ``tg``."""
    _require_cap(tg.size)
    parents, depths, ranks = labeled_tree_arrays(tg.n)
    return int(kernels.count_penrose(parents, depths, ranks, tg.matrix(), check_t2))


def ursell_brute(tup: Sequence[int], g: DependencyGraph) -> int:
    """Ursell coefficient by direct summation over connected subgraphs.

    A single point gives 1; a disconnected tuple graph gives 0.
    """
    return ursell_of_graph(tuple_graph(tup, g))


def ursell_penrose(tup: Sequence[int], g: DependencyGraph, check_t2: bool = True) -> int:
    """Ursell coefficient as (-1)^n times the number of Penrose trees."""
    tg = tuple_graph(tup, g)
    return (-1) ** tg.n * penrose_count_of_graph(tg, check_t2)


def penrose_trees(tup: Sequence[int], g: DependencyGraph) -> list[LabeledRootedTree]:
    """The Penrose labeled trees of ``tup``, in enumeration order."""
    _require_cap(len(tup))
    n = len(tup) - 1
    return [th for th in enumerate_labeled_trees(n) if is_penrose_pair(th, tup, g)]


# ---------------------------------------------------------------------------
# partition scheme
# ---------------------------------------------------------------------------


def partition_map_p(theta: LabeledRootedTree, tg: TupleGraph) -> TupleGraph:
    """Largest graph of the interval headed by ``theta`` inside ``tg``."""
    if theta.size != tg.size:
        raise InvalidInstanceError("tree and tuple graph have different sizes")
    if not theta.edges <= tg.edges:
        raise InvalidInstanceError("tree is not a subgraph of the tuple graph")
    depth, ranks, par = theta.depth, theta.ranks, theta.parent
    added = set(theta.edges)
    for i, j in tg.edges - theta.edges:
        if depth[i] == depth[j]:
            added.add((i, j))
            continue
        for a, b in ((i, j), (j, i)):
            if depth[b] == depth[a] - 1 and ranks[par[a]] < ranks[b]:
                added.add((i, j))
    return TupleGraph(tg.size, frozenset(added))


def partition_map_q(sub: TupleGraph) -> LabeledRootedTree:
    """Spanning tree of ``sub`` obtained by the label-ordered pruning sweep.

    Same-depth edges are dropped; then, level by level in plane-tree order of
    the tree built so far, each vertex keeps only the edge to the first vertex
    one level up that reaches it.  Depths are preserved.
    """
    dep = sub.depths()
    if dep is None:
        raise InvalidInstanceError("graph is disconnected")
    adj = sub.adjacency_masks()
    parent = [-1] * sub.size
    level = [0]
    d = 0
    while True:
        d += 1
        nxt_members = [v for v in range(sub.size) if dep[v] == d]
        if not nxt_members:
            break
        claimed: dict[int, list[int]] = {u: [] for u in level}
        for v in nxt_members:
            for u in level:
                if (adj[u] >> v) & 1:
                    parent[v] = u
                    claimed[u].append(v)
                    break
        level = [v for u in level for v in claimed[u]]
    return LabeledRootedTree(tuple(parent))


@lru_cache(maxsize=None)
def _pair_index(size: int) -> dict[tuple[int, int], int]:
    return {p: k for k, p in enumerate(combinations(range(size), 2))}


def _edge_mask(edges, size: int) -> int:
    idx = _pair_index(size)
    m = 0
    for e in edges:
        m |= 1 << idx[e]
    return m


def connected_spanning_subgraphs(tg: TupleGraph) -> Iterator[TupleGraph]:
    """Every connected spanning subgraph of ``tg`` (increasing edge bitmask)."""
    _require_cap(tg.size)
    pairs = sorted(tg.edges)
    for mask in range(1 << len(pairs)):
        sub = TupleGraph(
            tg.size, frozenset(pairs[k] for k in range(len(pairs)) if (mask >> k) & 1)
        )
        if sub.is_connected():
            yield sub


def spanning_trees(tg: TupleGraph) -> list[LabeledRootedTree]:
    _require_cap(tg.size)
    return [th for th in enumerate_labeled_trees(tg.n) if th.edges <= tg.edges]


@dataclass(frozen=True)
class SchemeCheck:
    ok: bool
    n_trees: int
    n_subgraphs: int
    counterexample: dict | None = None


@lru_cache(maxsize=1 << 16)
def check_partition_scheme(tg: TupleGraph) -> SchemeCheck:
    """Check that the intervals [theta, p(theta)] tile the connected subgraphs.

    Every connected spanning subgraph must lie in exactly one interval, and
    ``q`` must send it to that interval's tree.
    """
    _require_cap(tg.size)
    subs = list(connected_spanning_subgraphs(tg))
    trees = spanning_trees(tg)
    if not subs:
        return SchemeCheck(not trees, len(trees), 0)
    tops = [partition_map_p(th, tg) for th in trees]
    tree_masks = np.array([_edge_mask(th.edges, tg.size) for th in trees], dtype=np.int64)
    top_masks = np.array([_edge_mask(t.edges, tg.size) for t in tops], dtype=np.int64)
    sub_masks = np.array([_edge_mask(s.edges, tg.size) for s in subs], dtype=np.int64)
    counts, first = kernels.interval_counts(tree_masks, top_masks, sub_masks)
    for k, sub in enumerate(subs):
        if counts[k] != 1:
            return SchemeCheck(False, len(trees), len(subs), {
                "subgraph": sorted(sub.edges), "intervals_containing": int(counts[k]),
            })
        owner = trees[int(first[k])]
        q = partition_map_q(sub)
        if q != owner:
            return SchemeCheck(False, len(trees), len(subs), {
                "subgraph": sorted(sub.edges),
                "interval_tree": sorted(owner.edges),
                "q_image": sorted(q.edges),
            })
    return SchemeCheck(True, len(trees), len(subs))


def verify_partition_scheme(tup: Sequence[int], g: DependencyGraph) -> bool:
    _require_cap(len(tup))
    return check_partition_scheme(tuple_graph(tup, g)).ok


def is_penrose_witness(tau, g: DependencyGraph) -> bool:
    """Penrose test for a witness tree (equal-depth and younger-uncle rules).

    ``tau`` is a :class:`mtcluster.mt_engine.WitnessTree`; it is validated as a
    proper witness tree first.
    """
    tau.validate(g)
    t, lab = tau.tree, tau.labels
    depth, par = t.depth, t.parent
    levels: list[list[int]] = []
    for v in range(t.size):  # natural labels: each level is in plane order
        if depth[v] == len(levels):
            levels.append([])
        levels[depth[v]].append(v)
    for level in levels:
        for v, u in combinations(level, 2):
            if not compatible(g, lab[v], lab[u]):
                return False
    for d in range(1, len(levels)):
        for v in levels[d]:
            for u in levels[d - 1]:
                if u > par[v] and not compatible(g, lab[v], lab[u]):
                    return False
    return True

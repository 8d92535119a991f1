"""Plane rooted trees, labeled rooted trees and the maps between them.

A plane rooted tree is stored with its natural labels: root 0, the root's
children 1..s_0 top to bottom, then the children of vertex 1, and so on.
With that convention the plane-tree order is integer comparison and a tree is
fully described by ``children[v]`` for every vertex ``v``.

Text form: each vertex is ``(`` followed by its children and ``)``, so the
root with two leaf children is ``"(()())"``.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import CapExceededError, InvalidInstanceError

PLANE_CAP = 10
LABELED_CAP = 7


@dataclass(frozen=True)
class PlaneRootedTree:
    children: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        expected = 1
        for v, kids in enumerate(self.children):
            if v >= expected:
                raise InvalidInstanceError("vertex not reachable from the root")
            for c in kids:
                if c != expected:
                    raise InvalidInstanceError(
                        f"children of {v} break the natural labeling: {kids}"
                    )
                expected += 1
        if expected != len(self.children):
            raise InvalidInstanceError("children lists do not cover every vertex")

    @classmethod
    def from_ordered(cls, root, kids_of) -> PlaneRootedTree:
        """Build from any ordered tree given by ``kids_of(node) -> list``.

        Nodes are relabeled naturally (breadth first, children in order).
        """
        order = [root]
        children: list[tuple[int, ...]] = []
        i = 0
        while i < len(order):
            ks = []
            for k in kids_of(order[i]):
                ks.append(len(order))
                order.append(k)
            children.append(tuple(ks))
            i += 1
        return cls(tuple(children))

    @classmethod
    def from_string(cls, text: str) -> PlaneRootedTree:
        text = text.strip()
        stack: list[list] = []
        root = None
        for ch in text:
            if ch == "(":
                node: list = []
                if stack:
                    stack[-1].append(node)
                elif root is not None:
                    raise InvalidInstanceError(f"more than one root in {text!r}")
                else:
                    root = node
                stack.append(node)
            elif ch == ")":
                if not stack:
                    raise InvalidInstanceError(f"unbalanced tree string {text!r}")
                stack.pop()
            elif not ch.isspace():
                raise InvalidInstanceError(f"unexpected character {ch!r} in tree string")
        if root is None or stack:
            raise InvalidInstanceError(f"unbalanced tree string {text!r}")
        return cls.from_ordered(root, lambda node: node)

    def to_string(self) -> str:
        out = []
        stack: list = [0]
        while stack:
            v = stack.pop()
            if v is None:
                out.append(")")
                continue
            out.append("(")
            stack.append(None)
            stack.extend(reversed(self.children[v]))
        return "".join(out)

    def __str__(self) -> str:
        return self.to_string()

    @property
    def size(self) -> int:
        return len(self.children)

    @property
    def n(self) -> int:
        """Number of non-root vertices."""
        return len(self.children) - 1

    @cached_property
    def parent(self) -> tuple[int, ...]:
        par = [-1] * self.size
        for v, kids in enumerate(self.children):
            for c in kids:
                par[c] = v
        return tuple(par)

    @cached_property
    def depth(self) -> tuple[int, ...]:
        dep = [0] * self.size
        for v in range(1, self.size):
            dep[v] = dep[self.parent[v]] + 1
        return tuple(dep)

    @property
    def child_counts(self) -> tuple[int, ...]:
        return tuple(len(k) for k in self.children)


@dataclass(frozen=True)
class LabeledRootedTree:
    """Tree on ``{0, ..., n}`` rooted at 0, given by its parent map."""

    parent: tuple[int, ...]

    def __post_init__(self):
        if not self.parent or self.parent[0] != -1:
            raise InvalidInstanceError("vertex 0 must be the root (parent -1)")
        size = len(self.parent)
        for i in range(1, size):
            if not 0 <= self.parent[i] < size or self.parent[i] == i:
                raise InvalidInstanceError(f"bad parent for vertex {i}")
        # every vertex must reach the root
        for i in range(1, size):
            seen = 0
            j = i
            while j != 0:
                j = self.parent[j]
                seen += 1
                if seen > size:
                    raise InvalidInstanceError("parent map contains a cycle")

    @classmethod
    def from_edges(cls, n: int, edges) -> LabeledRootedTree:
        adj: list[list[int]] = [[] for _ in range(n + 1)]
        count = 0
        for i, j in edges:
            adj[i].append(j)
            adj[j].append(i)
            count += 1
        if count != n:
            raise InvalidInstanceError(f"a tree on {n + 1} vertices needs {n} edges")
        par = [-2] * (n + 1)
        par[0] = -1
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for u in adj[v]:
                if par[u] == -2:
                    par[u] = v
                    queue.append(u)
        if -2 in par:
            raise InvalidInstanceError("edge set is not connected")
        return cls(tuple(par))

    @property
    def size(self) -> int:
        return len(self.parent)

    @property
    def n(self) -> int:
        return len(self.parent) - 1

    @property
    def edges(self) -> frozenset[tuple[int, int]]:
        return frozenset(
            (min(i, p), max(i, p)) for i, p in enumerate(self.parent) if p >= 0
        )

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        kids: list[list[int]] = [[] for _ in range(self.size)]
        for i in range(1, self.size):
            kids[self.parent[i]].append(i)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def depth(self) -> tuple[int, ...]:
        dep = [0] * self.size
        for v in self.bfs_order:
            if v:
                dep[v] = dep[self.parent[v]] + 1
        return tuple(dep)

    @cached_property
    def bfs_order(self) -> tuple[int, ...]:
        """Vertices listed in plane-tree order of ``m(theta)``."""
        order = [0]
        i = 0
        while i < len(order):
            order.extend(self.children[order[i]])
            i += 1
        return tuple(order)

    @cached_property
    def ranks(self) -> tuple[int, ...]:
        """``ranks[i]`` is the natural label of vertex ``i`` inside ``m(theta)``.

        Comparing ranks is the induced plane-tree order on labeled vertices.
        """
        r = [0] * self.size
        for pos, v in enumerate(self.bfs_order):
            r[v] = pos
        return tuple(r)


def map_m(theta: LabeledRootedTree) -> PlaneRootedTree:
    """Forget labels, ordering each vertex's children by increasing label."""
    return PlaneRootedTree.from_ordered(0, lambda v: theta.children[v])


def map_theta(t: PlaneRootedTree) -> LabeledRootedTree:
    """The labeled tree whose labels are the natural labels of ``t``."""
    return LabeledRootedTree(t.parent)


def preimage_size_of_m(t: PlaneRootedTree) -> int:
    """Number of labeled trees sent to ``t`` by ``map_m``: n! / prod s_v!."""
    denom = 1
    for s in t.child_counts:
        denom *= math.factorial(s)
    return math.factorial(t.n) // denom


def plane_order_compare(t: PlaneRootedTree, u: int, v: int) -> int:
    """-1 if ``u`` precedes ``v`` in plane-tree order, 1 if it follows, 0 if equal."""
    for w in (u, v):
        if not 0 <= w < t.size:
            raise InvalidInstanceError(f"vertex {w} not in tree of size {t.size}")
    return (u > v) - (u < v)


def unlabeled_key(t: PlaneRootedTree) -> str:
    """Canonical string of ``t`` with child order forgotten."""

    def key(v: int) -> str:
        return "(" + "".join(sorted(key(c) for c in t.children[v])) + ")"

    return key(0)


def _check_cap(n: int, cap: int, what: str) -> None:
    if n < 0:
        raise InvalidInstanceError("tree size must be nonnegative")
    if n > cap:
        raise CapExceededError(f"{what} enumeration capped at n={cap}, got n={n}")


@lru_cache(maxsize=None)
def _forest_strings(k: int) -> tuple[str, ...]:
    # ordered forests with k vertices in total; smaller first tree first
    if k == 0:
        return ("",)
    out = []
    for j in range(1, k + 1):
        for inner in _forest_strings(j - 1):
            for rest in _forest_strings(k - j):
                out.append("(" + inner + ")" + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def _plane_trees(n: int) -> tuple[PlaneRootedTree, ...]:
    return tuple(PlaneRootedTree.from_string("(" + f + ")") for f in _forest_strings(n))


def enumerate_plane_trees(n: int, cap: int = PLANE_CAP) -> Iterator[PlaneRootedTree]:
    """All plane rooted trees with ``n + 1`` vertices (Catalan(n) of them)."""
    _check_cap(n, cap, "plane tree")
    return iter(_plane_trees(n))


def _prufer_decode(seq: Sequence[int], size: int) -> list[tuple[int, int]]:
    degree = [1] * size
    for x in seq:
        degree[x] += 1
    edges = []
    for x in seq:
        leaf = next(i for i in range(size) if degree[i] == 1)
        edges.append((leaf, x))
        degree[leaf] -= 1
        degree[x] -= 1
    u, v = [i for i in range(size) if degree[i] == 1]
    edges.append((u, v))
    return edges


@lru_cache(maxsize=None)
def _labeled_trees(n: int) -> tuple[LabeledRootedTree, ...]:
    size = n + 1
    if size == 1:
        return (LabeledRootedTree((-1,)),)
    if size == 2:
        return (LabeledRootedTree((-1, 0)),)
    return tuple(
        LabeledRootedTree.from_edges(n, _prufer_decode(seq, size))
        for seq in itertools.product(range(size), repeat=size - 2)
    )


def enumerate_labeled_trees(n: int, cap: int = LABELED_CAP) -> Iterator[LabeledRootedTree]:
    """All (n+1)^(n-1) labeled trees on ``{0..n}`` rooted at 0 (Pruefer order)."""
    _check_cap(n, cap, "labeled tree")
    return iter(_labeled_trees(n))


def count_unlabeled(n: int, cap: int = PLANE_CAP) -> int:
    return len({unlabeled_key(t) for t in enumerate_plane_trees(n, cap)})


@lru_cache(maxsize=None)
def plane_tree_arrays(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Kernel inputs for all plane trees of size n+1.

    Returns ``(parents, depths, weights)`` with ``weights[t] = 1/prod s_v!``.
    """
    trees = _plane_trees(n) if n <= PLANE_CAP else None
    if trees is None:
        raise CapExceededError(f"plane tree enumeration capped at n={PLANE_CAP}")
    parents = np.array([t.parent for t in trees], dtype=np.int64).reshape(len(trees), n + 1)
    depths = np.array([t.depth for t in trees], dtype=np.int64).reshape(len(trees), n + 1)
    weights = np.array(
        [1.0 / math.prod(math.factorial(s) for s in t.child_counts) for t in trees]
    )
    for a in (parents, depths, weights):
        a.setflags(write=False)
    return parents, depths, weights


@lru_cache(maxsize=None)
def labeled_tree_arrays(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(parents, depths, ranks)`` for all labeled trees on ``{0..n}``."""
    _check_cap(n, LABELED_CAP, "labeled tree")
    trees = _labeled_trees(n)
    shape = (len(trees), n + 1)
    parents = np.array([t.parent for t in trees], dtype=np.int64).reshape(shape)
    depths = np.array([t.depth for t in trees], dtype=np.int64).reshape(shape)
    ranks = np.array([t.ranks for t in trees], dtype=np.int64).reshape(shape)
    for a in (parents, depths, ranks):
        a.setflags(write=False)
    return parents, depths, ranks

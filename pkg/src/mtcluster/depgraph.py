"""Dependency graphs on dense integer vertex ids, with bitmask vertex subsets.

Vertex subsets are plain Python ``int`` bitmasks: bit ``x`` set means vertex
``x`` belongs to the subset.  The integer order on vertex ids is the fixed
total order on events used when labeling witness trees.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import CapExceededError, InvalidInstanceError

#: largest vertex count accepted by exponential (exact-mode) operations
EXACT_CAP = 64


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def members(mask: int) -> list[int]:
    """Vertex ids in ``mask``, increasing."""
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return out


@dataclass(frozen=True)
class DependencyGraph:
    """Finite simple graph on vertices ``0 .. n_vertices-1``.

    ``adjacency[x]`` is the sorted tuple of neighbours of ``x``.
    """

    n_vertices: int
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.adjacency) != self.n_vertices:
            raise InvalidInstanceError("adjacency length does not match vertex count")
        for x, nbrs in enumerate(self.adjacency):
            for y in nbrs:
                if not 0 <= y < self.n_vertices:
                    raise InvalidInstanceError(f"neighbour {y} of {x} out of range")
                if y == x:
                    raise InvalidInstanceError(f"self loop at {x}")
                if x not in self.adjacency[y]:
                    raise InvalidInstanceError(f"asymmetric edge {x}-{y}")
        object.__setattr__(self, "_nbr_masks", tuple(mask_of(a) for a in self.adjacency))

    @classmethod
    def from_edges(cls, n_vertices: int, edges: Iterable[tuple[int, int]]) -> DependencyGraph:
        adj: list[set[int]] = [set() for _ in range(n_vertices)]
        for x, y in edges:
            if not (0 <= x < n_vertices and 0 <= y < n_vertices):
                raise InvalidInstanceError(f"edge {x}-{y} out of range")
            if x == y:
                raise InvalidInstanceError(f"self loop at {x}")
            adj[x].add(y)
            adj[y].add(x)
        return cls(n_vertices, tuple(tuple(sorted(a)) for a in adj))

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(x, y) for x in range(self.n_vertices) for y in self.adjacency[x] if x < y]

    @property
    def full_mask(self) -> int:
        return (1 << self.n_vertices) - 1

    def neighbors_mask(self, x: int) -> int:
        return self._nbr_masks[x]

    def star_mask(self, x: int) -> int:
        """Bitmask of the closed neighbourhood ``adj(x) | {x}``."""
        return self._nbr_masks[x] | (1 << x)

    def star(self, x: int) -> tuple[int, ...]:
        return tuple(sorted(self.adjacency[x] + (x,)))

    def degree(self, x: int) -> int:
        return len(self.adjacency[x])

    def incompat_matrix(self) -> np.ndarray:
        """Boolean matrix of the incompatibility relation (diagonal true)."""
        m = np.eye(self.n_vertices, dtype=bool)
        for x, y in self.edges:
            m[x, y] = m[y, x] = True
        return m

    def require_exact(self, what: str = "exact mode") -> None:
        if self.n_vertices > EXACT_CAP:
            raise CapExceededError(
                f"graph too large for exact mode ({self.n_vertices} > {EXACT_CAP} vertices, {what})"
            )


def build_from_variable_sets(vbl_sets: Sequence[Iterable[int]]) -> DependencyGraph:
    """Edge ``{x, y}`` whenever events ``x != y`` share a variable."""
    sets = [frozenset(s) for s in vbl_sets]
    if not sets:
        raise InvalidInstanceError("no events")
    for x, s in enumerate(sets):
        if not s:
            raise InvalidInstanceError(f"unconstrained event {x}")
    by_var: dict[int, list[int]] = {}
    for x, s in enumerate(sets):
        for var in s:
            by_var.setdefault(var, []).append(x)
    edges = set()
    for evs in by_var.values():
        for i, x in enumerate(evs):
            for y in evs[i + 1:]:
                edges.add((x, y))
    return DependencyGraph.from_edges(len(sets), edges)


def is_independent(g: DependencyGraph, s: int) -> bool:
    for x in members(s):
        if g.neighbors_mask(x) & s:
            return False
    return True


def compatible(g: DependencyGraph, x: int, y: int) -> bool:
    """The compatibility relation: distinct and non-adjacent."""
    return x != y and not (g.neighbors_mask(x) >> y) & 1


def independent_subsets_of(g: DependencyGraph, domain: int) -> Iterator[int]:
    """Every independent subset of ``domain`` once, in increasing bitmask order.

    Includes the empty set.
    """
    verts = members(domain)
    if len(verts) > EXACT_CAP:
        raise CapExceededError("domain too large for exact mode")
    found: list[int] = []

    def grow(i: int, chosen: int, blocked: int) -> None:
        if i == len(verts):
            found.append(chosen)
            return
        v = verts[i]
        grow(i + 1, chosen, blocked)
        if not (blocked >> v) & 1:
            grow(i + 1, chosen | (1 << v), blocked | g.star_mask(v))

    grow(0, 0, 0)
    found.sort()
    return iter(found)

"""Problem encodings: CNF formulas (DIMACS, random k-SAT) and hypergraph 2-coloring.

Each encoding returns ``(VariableModel, [EventSpec], DependencyGraph)`` with
fair-bit variables, so every event probability is a power of two.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .depgraph import build_from_variable_sets
from .errors import DimacsError, InvalidInstanceError
from .mt_engine import EventSpec, VariableModel


@dataclass(frozen=True)
class CnfFormula:
    n_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for c in self.clauses:
            if not c:
                raise InvalidInstanceError("empty clause")
            for lit in c:
                if lit == 0 or abs(lit) > self.n_vars:
                    raise InvalidInstanceError(f"literal {lit} out of range 1..{self.n_vars}")

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.n_vars} {len(self.clauses)}"]
        lines += [" ".join(map(str, c)) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"

    def satisfied_by(self, assignment) -> bool:
        """``assignment[v]`` is the truth value of variable ``v + 1``."""
        return all(any(assignment[abs(l) - 1] == (l > 0) for l in c) for c in self.clauses)


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF. Tautological clauses are kept with a warning."""
    header = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if header is not None:
                raise DimacsError(f"line {lineno}: second header")
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise DimacsError(f"line {lineno}: malformed header {line!r}") from None
            if header[0] < 0 or header[1] < 0:
                raise DimacsError(f"line {lineno}: negative counts in header")
            continue
        if header is None:
            raise DimacsError(f"line {lineno}: clause before header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"line {lineno}: bad literal {tok!r}") from None
            if lit == 0:
                if not current:
                    raise DimacsError(f"line {lineno}: empty clause")
                clauses.append(tuple(current))
                current = []
            elif abs(lit) > header[0]:
                raise DimacsError(f"line {lineno}: literal {lit} out of range")
            else:
                current.append(lit)
    if header is None:
        raise DimacsError("missing header")
    if current:
        raise DimacsError("last clause not terminated by 0")
    if len(clauses) != header[1]:
        raise DimacsError(f"header announces {header[1]} clauses, found {len(clauses)}")
    for k, c in enumerate(clauses):
        if any(-lit in c for lit in c):
            warnings.warn(f"clause {k} is tautological", stacklevel=2)
    return CnfFormula(header[0], tuple(clauses))


def _clause_event(k: int, clause: tuple[int, ...]) -> EventSpec:
    # event holds when every literal is false; vbl is sorted, so map by variable
    want = {}
    for lit in clause:
        want.setdefault(abs(lit) - 1, set()).add(lit < 0)
    vbl = tuple(sorted(want))
    falsifying = tuple(next(iter(want[v])) if len(want[v]) == 1 else None for v in vbl)

    if any(f is None for f in falsifying):
        # tautology: can never be falsified
        return EventSpec(k, vbl, lambda vals: False, 0.0)

    def violated(vals, target=falsifying):
        return vals == target

    return EventSpec(k, vbl, violated, 2.0 ** -len(vbl))


def sat_to_lll(f: CnfFormula):
    """One bad event per clause (clause falsified) over fair-bit variables."""
    events = [_clause_event(k, c) for k, c in enumerate(f.clauses)]
    g = build_from_variable_sets([e.vbl for e in events])
    return VariableModel.fair_bits(f.n_vars), events, g


def random_ksat(n_vars: int, n_clauses: int, k: int, seed: int) -> CnfFormula:
    """Uniform random k-SAT: each clause a uniform k-subset with uniform signs."""
    if k < 1 or k > n_vars or n_clauses < 0:
        raise InvalidInstanceError(f"infeasible random k-SAT parameters n={n_vars} m={n_clauses} k={k}")
    rng = np.random.default_rng(seed)
    clauses = []
    for _ in range(n_clauses):
        vs = np.sort(rng.choice(n_vars, size=k, replace=False)) + 1
        signs = rng.integers(0, 2, size=k) * 2 - 1
        clauses.append(tuple(int(v * s) for v, s in zip(vs, signs)))
    return CnfFormula(n_vars, tuple(clauses))


@dataclass(frozen=True)
class Hypergraph:
    n_vertices: int
    edges: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for e in self.edges:
            if len(e) < 2:
                raise InvalidInstanceError(f"hyperedge {e} has fewer than 2 vertices")
            if len(set(e)) != len(e):
                raise InvalidInstanceError(f"hyperedge {e} repeats a vertex")
            for v in e:
                if not 0 <= v < self.n_vertices:
                    raise InvalidInstanceError(f"hyperedge vertex {v} out of range")


def parse_hypergraph(text: str) -> Hypergraph:
    """Read ``h V E`` followed by one whitespace-separated vertex list per edge."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("c")]
    if not lines:
        raise DimacsError("missing header")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "h":
        raise DimacsError(f"malformed hypergraph header {lines[0]!r}")
    try:
        n, m = int(head[1]), int(head[2])
        edges = tuple(tuple(int(t) for t in ln.split()) for ln in lines[1:])
    except ValueError as exc:
        raise DimacsError(f"bad integer in hypergraph: {exc}") from None
    if len(edges) != m:
        raise DimacsError(f"header announces {m} edges, found {len(edges)}")
    return Hypergraph(n, edges)


def hypergraph_coloring_to_lll(h: Hypergraph):
    """One bad event per hyperedge (monochromatic) over fair-bit vertex colors."""
    events = []
    for k, e in enumerate(h.edges):
        def mono(vals):
            return all(v == vals[0] for v in vals)

        events.append(EventSpec(k, tuple(e), mono, 2.0 ** (1 - len(e))))
    g = build_from_variable_sets([ev.vbl for ev in events])
    return VariableModel.fair_bits(h.n_vertices), events, g

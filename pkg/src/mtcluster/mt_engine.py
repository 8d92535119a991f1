"""Moser-Tardos resampling over a finite variable model, and witness trees.

The run is fully reproducible from ``(model, events, seed, rule)``: the seed
feeds a ``numpy`` ``SeedSequence`` that is split into a sampling stream
(variables are drawn in increasing variable id) and a selection stream (used
only by the ``"random"`` rule).
"""

from __future__ import annotations

import bisect
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .depgraph import DependencyGraph, build_from_variable_sets, compatible, members
from .errors import CapExceededError, InvalidInstanceError
from .penrose import is_penrose_witness
from .trees import PlaneRootedTree

RULES = ("lowest", "random")
TIE_BREAKS = ("youngest", "oldest")
DEFAULT_STEP_CAP = 10**6
EXACT_PROB_CAP = 1 << 20


@dataclass(frozen=True)
class Variable:
    values: tuple
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != len(self.probs) or not self.values:
            raise InvalidInstanceError("variable needs matching, nonempty values and probs")
        if any(q < 0 for q in self.probs):
            raise InvalidInstanceError("negative probability")
        if abs(math.fsum(self.probs) - 1.0) > 1e-12:
            raise InvalidInstanceError("probabilities must sum to 1")
        cum = list(itertools.accumulate(self.probs))
        cum[-1] = 1.0
        object.__setattr__(self, "_cum", cum)

    def index_of(self, u: float) -> int:
        """Outcome index for a uniform draw ``u`` in [0, 1)."""
        return min(bisect.bisect_right(self._cum, u), len(self.values) - 1)


FAIR_BIT = Variable((False, True), (0.5, 0.5))


@dataclass(frozen=True)
class VariableModel:
    variables: tuple[Variable, ...]

    @classmethod
    def fair_bits(cls, n: int) -> VariableModel:
        return cls((FAIR_BIT,) * n)

    def __len__(self) -> int:
        return len(self.variables)


@dataclass(frozen=True)
class EventSpec:
    """Bad event: ``predicate`` sees the values of ``vbl`` (sorted) as a tuple."""

    id: int
    vbl: tuple[int, ...]
    predicate: Callable[[tuple], bool] = field(compare=False)
    p: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "vbl", tuple(sorted(set(self.vbl))))
        if self.p is not None and not 0.0 <= self.p <= 1.0:
            raise InvalidInstanceError(f"event {self.id} probability outside [0, 1]")


def exact_event_probability(e: EventSpec, m: VariableModel, cap: int = EXACT_PROB_CAP) -> float:
    """Probability of ``e`` under the product measure, by full enumeration."""
    domains = [m.variables[v] for v in e.vbl]
    if math.prod(len(d.values) for d in domains) > cap:
        raise CapExceededError(
            f"event {e.id}: variable domain product exceeds {cap}; supply p explicitly"
        )
    total = 0.0
    for combo in itertools.product(*(range(len(d.values)) for d in domains)):
        if e.predicate(tuple(d.values[k] for d, k in zip(domains, combo))):
            total += math.prod(d.probs[k] for d, k in zip(domains, combo))
    return total


def event_probabilities(events: Sequence[EventSpec], m: VariableModel) -> np.ndarray:
    return np.array([e.p if e.p is not None else exact_event_probability(e, m) for e in events])


@dataclass
class ExecutionLog:
    seed: int
    rule: str
    steps: list[int]
    terminated: bool
    counts: dict[int, int]
    assignment: list | None = None

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "rule": self.rule,
            "steps": list(self.steps),
            "terminated": self.terminated,
            "counts": {str(k): v for k, v in sorted(self.counts.items())},
            "assignment": self.assignment,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> ExecutionLog:
        return cls(
            doc["seed"], doc["rule"], list(doc["steps"]), doc["terminated"],
            {int(k): v for k, v in doc["counts"].items()}, doc.get("assignment"),
        )


def validate_instance(m: VariableModel, events: Sequence[EventSpec], g: DependencyGraph) -> None:
    for k, e in enumerate(events):
        if e.id != k:
            raise InvalidInstanceError(f"event at position {k} has id {e.id}")
        for v in e.vbl:
            if not 0 <= v < len(m):
                raise InvalidInstanceError(f"event {k} uses unknown variable {v}")
    if g != build_from_variable_sets([e.vbl for e in events]):
        raise InvalidInstanceError("dependency graph does not match the variable overlaps")


def run_mt(
    m: VariableModel,
    events: Sequence[EventSpec],
    g: DependencyGraph,
    seed: int = 0,
    step_cap: int = DEFAULT_STEP_CAP,
    rule: str = "lowest",
    validate: bool = True,
    observer: Callable[[int, list, list], None] | None = None,
) -> ExecutionLog:
    """Run the resampling algorithm until no event holds or ``step_cap`` steps.

    ``rule="lowest"`` resamples the violated event with the smallest id;
    ``rule="random"`` picks uniformly among violated events.  ``observer``
    (if given) is called as ``observer(event, before, after)`` on every step.
    Hitting the cap is not an error: the log comes back with
    ``terminated=False``.
    """
    if rule not in RULES:
        raise InvalidInstanceError(f"unknown selection rule {rule!r}")
    if step_cap < 1:
        raise InvalidInstanceError("step_cap must be at least 1")
    if validate:
        validate_instance(m, events, g)
    sample_seq, select_seq = np.random.SeedSequence(seed).spawn(2)
    rng = np.random.Generator(np.random.PCG64(sample_seq))
    picker = np.random.Generator(np.random.PCG64(select_seq)) if rule == "random" else None
    variables = m.variables

    state = [variables[v].index_of(u) for v, u in enumerate(rng.random(len(variables)))]

    def holds(e: EventSpec) -> bool:
        return bool(e.predicate(tuple(variables[v].values[state[v]] for v in e.vbl)))

    violated = {e.id for e in events if holds(e)}
    affected = [members(g.star_mask(x)) for x in range(g.n_vertices)]
    steps: list[int] = []
    while violated and len(steps) < step_cap:
        if picker is None:
            x = min(violated)
        else:
            pool = sorted(violated)
            x = pool[int(picker.integers(len(pool)))]
        steps.append(x)
        vbl = events[x].vbl
        before = list(state) if observer else None
        for v, u in zip(vbl, rng.random(len(vbl))):
            state[v] = variables[v].index_of(u)
        if observer:
            observer(x, before, list(state))
        for y in affected[x]:
            if holds(events[y]):
                violated.add(y)
            else:
                violated.discard(y)
    counts = {e.id: 0 for e in events}
    for x in steps:
        counts[x] += 1
    assignment = [variables[v].values[state[v]] for v in range(len(variables))]
    return ExecutionLog(seed, rule, steps, not violated, counts, assignment)


def replay_assignment(events: Sequence[EventSpec], assignment: Sequence) -> list[int]:
    """Ids of events that hold under ``assignment`` (empty when it is a solution)."""
    return [e.id for e in events if e.predicate(tuple(assignment[v] for v in e.vbl))]


# ---------------------------------------------------------------------------
# witness trees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WitnessTree:
    """Plane rooted tree with an event label on every (naturally labeled) vertex."""

    tree: PlaneRootedTree
    labels: tuple[int, ...]

    def validate(self, g: DependencyGraph) -> None:
        """Raise unless parent/child labels overlap and sibling labels increase."""
        t = self.tree
        if len(self.labels) != t.size:
            raise InvalidInstanceError("one label per vertex required")
        for lab in self.labels:
            if not 0 <= lab < g.n_vertices:
                raise InvalidInstanceError(f"label {lab} outside the graph")
        for v, kids in enumerate(t.children):
            for c in kids:
                if compatible(g, self.labels[v], self.labels[c]):
                    raise InvalidInstanceError(f"child {c} label compatible with its parent")
            for a, b in zip(kids, kids[1:]):
                if not self.labels[a] < self.labels[b]:
                    raise InvalidInstanceError(f"sibling labels of {v} not increasing")

    def weight(self, p: Sequence[float]) -> float:
        return math.prod(float(p[lab]) for lab in self.labels)

    def to_string(self) -> str:
        # iterative: witness trees from long runs can be hundreds of levels deep
        out = []
        stack: list = [0]
        while stack:
            v = stack.pop()
            if v is None:
                out.append(")")
                continue
            out.append(f"{self.labels[v]}(")
            stack.append(None)
            stack.extend(reversed(self.tree.children[v]))
        return "".join(out)

    def __str__(self) -> str:
        return self.to_string()

    @classmethod
    def from_string(cls, text: str) -> WitnessTree:
        text = "".join(text.split())
        pos = 0
        root = None
        stack: list = []
        while pos < len(text):
            if text[pos] == ")":
                if not stack:
                    raise InvalidInstanceError(f"malformed witness tree string {text!r}")
                stack.pop()
                pos += 1
                continue
            start = pos
            while pos < len(text) and text[pos].isdigit():
                pos += 1
            if start == pos or pos >= len(text) or text[pos] != "(":
                raise InvalidInstanceError(f"malformed witness tree string {text!r}")
            node = (int(text[start:pos]), [])
            pos += 1
            if stack:
                stack[-1][1].append(node)
            elif root is None:
                root = node
            else:
                raise InvalidInstanceError(f"trailing characters in {text!r}")
            stack.append(node)
        if root is None or stack:
            raise InvalidInstanceError(f"malformed witness tree string {text!r}")
        return _witness_from_nested(root)


def _witness_from_nested(root) -> WitnessTree:
    order = [root]
    i = 0
    while i < len(order):
        order.extend(order[i][1])
        i += 1
    tree = PlaneRootedTree.from_ordered(root, lambda nd: nd[1])
    return WitnessTree(tree, tuple(nd[0] for nd in order))


def witness_tree(steps: Sequence[int] | ExecutionLog, s: int, g: DependencyGraph,
                 tie_break: str = "youngest") -> WitnessTree:
    """Witness tree of step ``s`` (1-based) of a log.

    Walking back from step ``s - 1`` to step 1, an earlier event is attached
    below the deepest vertex whose label overlaps it; among several deepest
    such vertices the youngest in plane-tree order is taken (``"oldest"``
    selects the other end, kept only as an alternative reading).  New children
    are placed among their siblings by increasing label.
    """
    if tie_break not in TIE_BREAKS:
        raise InvalidInstanceError(f"unknown tie break {tie_break!r}")
    if isinstance(steps, ExecutionLog):
        steps = steps.steps
    if not 1 <= s <= len(steps):
        raise InvalidInstanceError(f"step {s} outside 1..{len(steps)}")
    root = (steps[s - 1], [])
    # nodes grouped by label, plus the deepest depth seen for each label
    by_label: dict[int, list] = {root[0]: [(root, 0)]}
    max_depth: dict[int, int] = {root[0]: 0}
    for i in range(s - 1, 0, -1):
        c = steps[i - 1]
        labels = [y for y in members(g.star_mask(c)) if y in max_depth]
        if not labels:
            continue
        deepest = max(max_depth[y] for y in labels)
        level = [nd for y in labels if max_depth[y] == deepest
                 for nd, d in by_label[y] if d == deepest]
        if len(level) == 1:
            target = level[0]
        else:
            candidates = {id(nd) for nd in level}
            ranked = [nd for nd in _bfs(root) if id(nd) in candidates]
            target = ranked[-1] if tie_break == "youngest" else ranked[0]
        new = (c, [])
        kids = target[1]
        at = bisect.bisect_left([k[0] for k in kids], c)
        if at < len(kids) and kids[at][0] == c:
            raise AssertionError("duplicate sibling label while building witness tree")
        kids.insert(at, new)
        by_label.setdefault(c, []).append((new, deepest + 1))
        max_depth[c] = max(max_depth.get(c, -1), deepest + 1)
    return _witness_from_nested(root)


def _bfs(root) -> list:
    order = [root]
    i = 0
    while i < len(order):
        order.extend(order[i][1])
        i += 1
    return order


@dataclass
class WitnessStats:
    entries: list[dict]
    distinct_per_root: dict[int, int]
    all_penrose: bool
    all_distinct: bool

    def to_dict(self) -> dict:
        return {
            "entries": self.entries,
            "distinct_per_root": {str(k): v for k, v in sorted(self.distinct_per_root.items())},
            "all_penrose": self.all_penrose,
            "all_distinct": self.all_distinct,
        }


def collect_witness_stats(log: ExecutionLog, g: DependencyGraph, sample: Iterable[int],
                          p: Sequence[float] | None = None,
                          tie_break: str = "youngest") -> WitnessStats:
    """Witness tree, Penrose verdict and weight for each sampled step."""
    entries = []
    seen: dict[int, set[str]] = {}
    n_per_root: dict[int, int] = {}
    all_penrose = True
    for s in sorted(set(sample)):
        tau = witness_tree(log.steps, s, g, tie_break)
        pen = is_penrose_witness(tau, g)
        all_penrose &= pen
        text = tau.to_string()
        root = tau.labels[0]
        seen.setdefault(root, set()).add(text)
        n_per_root[root] = n_per_root.get(root, 0) + 1
        entries.append({
            "step": s,
            "tree": text,
            "penrose": pen,
            "weight": None if p is None else tau.weight(p),
        })
    distinct = {k: len(v) for k, v in seen.items()}
    return WitnessStats(entries, distinct, all_penrose, distinct == n_per_root)


# ---------------------------------------------------------------------------
# batches
# ---------------------------------------------------------------------------


@dataclass
class CountAccumulator:
    """Running sums of per-event resampling counts; ``merge`` is associative."""

    n_events: int
    runs: int = 0
    unfinished: int = 0
    total: np.ndarray = None
    total_sq: np.ndarray = None

    def __post_init__(self):
        if self.total is None:
            self.total = np.zeros(self.n_events)
        if self.total_sq is None:
            self.total_sq = np.zeros(self.n_events)

    def add(self, log: ExecutionLog) -> None:
        c = np.array([log.counts[x] for x in range(self.n_events)], dtype=np.float64)
        self.runs += 1
        self.unfinished += not log.terminated
        self.total += c
        self.total_sq += c * c

    def merge(self, other: CountAccumulator) -> CountAccumulator:
        return CountAccumulator(
            self.n_events, self.runs + other.runs, self.unfinished + other.unfinished,
            self.total + other.total, self.total_sq + other.total_sq,
        )

    @property
    def mean(self) -> np.ndarray:
        return self.total / max(self.runs, 1)

    @property
    def std_error(self) -> np.ndarray:
        if self.runs < 2:
            return np.full(self.n_events, np.inf)
        var = (self.total_sq - self.runs * self.mean**2) / (self.runs - 1)
        return np.sqrt(np.maximum(var, 0.0) / self.runs)


def run_batch(m: VariableModel, events: Sequence[EventSpec], g: DependencyGraph,
              seeds: Iterable[int], step_cap: int = DEFAULT_STEP_CAP,
              rule: str = "lowest") -> CountAccumulator:
    validate_instance(m, events, g)
    acc = CountAccumulator(len(events))
    for seed in seeds:
        acc.add(run_mt(m, events, g, seed, step_cap, rule, validate=False))
    return acc

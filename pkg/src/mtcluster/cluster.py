"""Hard-core lattice gas on a dependency graph.

Partition function (independence polynomial), pressure, the one-point
function ``Pi_x = Xi_{X - star(x)} / Xi_X`` and its positive Penrose-tree
series, plus the Dobrushin / Fernandez-Procacci criteria, the zero-free
(Shearer) region test and the resampling bounds derived from them.

Probabilities enter as activities ``w = -p``.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from itertools import product

import numpy as np

from . import kernels
from .depgraph import (
    EXACT_CAP,
    DependencyGraph,
    independent_subsets_of,
    members,
)
from .errors import CapExceededError, InvalidInstanceError, OutsideRegionError
from .penrose import ursell_brute
from .trees import PLANE_CAP, plane_tree_arrays

log = logging.getLogger(__name__)

#: positivity guard band; values in (0, MARGINAL] are flagged
MARGINAL = 1e-12
#: largest graph for the all-subsets (paranoid) region test
PARANOID_CAP = 22
#: iteration cap of the automatic mu search
MU_ITER_CAP = 1000


def _as_vector(values, n: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != (n,):
        raise InvalidInstanceError(f"{name} must have length {n}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInstanceError(f"non-finite activities in {name}")
    return arr


class _XiMemo:
    """Deletion recursion Xi_S = Xi_{S-x} + w_x Xi_{S - star(x)}, x = min(S)."""

    def __init__(self, g: DependencyGraph, w: np.ndarray):
        self.star = [g.star_mask(x) for x in range(g.n_vertices)]
        self.w = [float(v) for v in w]
        self.memo: dict[int, float] = {0: 1.0}

    def __call__(self, s: int) -> float:
        memo = self.memo
        if s in memo:
            return memo[s]
        # explicit stack keeps deep graphs within the recursion limit
        stack = [s]
        while stack:
            cur = stack[-1]
            if cur in memo:
                stack.pop()
                continue
            x = (cur & -cur).bit_length() - 1
            a = cur & ~(1 << x)
            b = cur & ~self.star[x]
            missing = [m for m in (a, b) if m not in memo]
            if missing:
                stack.extend(missing)
                continue
            memo[cur] = memo[a] + self.w[x] * memo[b]
            stack.pop()
        return memo[s]


def partition_function(g: DependencyGraph, w, domain: int | None = None) -> float:
    """Independence polynomial of ``g`` restricted to ``domain`` at activities ``w``."""
    g.require_exact("partition function")
    w = _as_vector(w, g.n_vertices, "w")
    if domain is None:
        domain = g.full_mask
    if domain & ~g.full_mask:
        raise InvalidInstanceError("domain outside the vertex range")
    return _XiMemo(g, w)(domain)


def pressure(g: DependencyGraph, w) -> float:
    xi = partition_function(g, w)
    if xi <= 0:
        raise OutsideRegionError("outside zero-free region: partition function <= 0")
    return math.log(xi) / g.n_vertices


def pi_exact(g: DependencyGraph, x0: int, w) -> float:
    """One-point function ``d log Xi / d w_x0`` as a ratio of partition functions."""
    g.require_exact("one-point function")
    w = _as_vector(w, g.n_vertices, "w")
    memo = _XiMemo(g, w)
    den = memo(g.full_mask)
    if den == 0:
        raise OutsideRegionError("partition function vanishes")
    return memo(g.full_mask & ~g.star_mask(x0)) / den


def pi_series_truncated(g: DependencyGraph, x0: int, rho, n_max: int) -> list[float]:
    """Partial sums ``S_0 .. S_n_max`` of the positive Penrose-tree series of Pi.

    Order ``n`` collects plane trees with ``n + 1`` vertices, each weighted by
    ``1 / prod s_v!`` and by the sum over root-``x0`` label tuples making the
    naturally labeled tree Penrose.
    """
    rho = _as_vector(rho, g.n_vertices, "rho")
    if np.any(rho < 0):
        raise InvalidInstanceError("rho must be nonnegative")
    if n_max > PLANE_CAP:
        raise CapExceededError(f"n_max capped at {PLANE_CAP}")
    if n_max < 0:
        raise InvalidInstanceError("n_max must be nonnegative")
    incompat = g.incompat_matrix()
    sums = []
    total = 0.0
    for n in range(n_max + 1):
        parents, depths, weights = plane_tree_arrays(n)
        per_tree = kernels.tuple_weights(parents, depths, incompat, rho, x0, True)
        total += float(np.dot(weights, per_tree))
        sums.append(total)
    return sums


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------


@dataclass
class VertexVerdict:
    id: int
    passed: bool
    slack: float | None
    t_bound: float | None


@dataclass
class ConvergenceReport:
    criterion: str
    per_vertex: list[VertexVerdict]
    total_bound: float | None
    xi_at_minus_p: float | None
    mu: list[float] | None = None
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.per_vertex)

    def to_dict(self) -> dict:
        doc = {
            "criterion": self.criterion,
            "passed": self.passed,
            "per_vertex": [
                {"id": v.id, "pass": v.passed, "slack": v.slack, "t_bound": v.t_bound}
                for v in self.per_vertex
            ],
            "total_bound": self.total_bound,
            "xi_at_minus_p": self.xi_at_minus_p,
        }
        if self.mu is not None:
            doc["mu"] = self.mu
        doc.update(self.extra)
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _check_nonneg(g: DependencyGraph, p, mu):
    p = _as_vector(p, g.n_vertices, "p")
    mu = _as_vector(mu, g.n_vertices, "mu")
    if np.any(p < 0) or np.any(mu < 0):
        raise InvalidInstanceError("criteria need nonnegative p and mu")
    return p, mu


def dobrushin_denominator(g: DependencyGraph, mu, x: int) -> float:
    return math.prod(1.0 + float(mu[y]) for y in g.star(x))


def fp_denominator(g: DependencyGraph, mu, x: int) -> float:
    """Sum over independent R inside star(x) of prod_{y in R} mu_y."""
    total = 0.0
    for r in independent_subsets_of(g, g.star_mask(x)):
        total += math.prod(float(mu[y]) for y in members(r))
    return total


def _xi_minus_p_or_none(g: DependencyGraph, p) -> float | None:
    if g.n_vertices > EXACT_CAP:
        return None
    return partition_function(g, -np.asarray(p, dtype=np.float64))


def _criterion_report(name, g, p, mu, denominator) -> ConvergenceReport:
    verdicts = []
    for x in range(g.n_vertices):
        threshold = float(mu[x]) / denominator(g, mu, x)
        ok = bool(p[x] <= threshold)
        verdicts.append(VertexVerdict(x, ok, threshold - float(p[x]), float(mu[x]) if ok else None))
    all_ok = all(v.passed for v in verdicts)
    total = float(sum(mu)) if all_ok else None
    if not all_ok:
        for v in verdicts:
            v.t_bound = None
    return ConvergenceReport(name, verdicts, total, _xi_minus_p_or_none(g, p), [float(m) for m in mu])


def check_dobrushin(g: DependencyGraph, p, mu) -> ConvergenceReport:
    """Per-vertex test ``p_x <= mu_x / prod_{y in star(x)} (1 + mu_y)``.

    When every vertex passes, ``t_bound`` carries ``mu_x``, which then bounds
    ``p_x * Pi_x(-p)``.
    """
    p, mu = _check_nonneg(g, p, mu)
    return _criterion_report("dobrushin", g, p, mu, dobrushin_denominator)


def check_fp(g: DependencyGraph, p, mu) -> ConvergenceReport:
    """Fernandez-Procacci test; the denominator keeps only independent R."""
    p, mu = _check_nonneg(g, p, mu)
    return _criterion_report("fernandez_procacci", g, p, mu, fp_denominator)


def search_mu(g: DependencyGraph, p, criterion: str = "fernandez_procacci",
              inflate: float = 1e-9) -> np.ndarray | None:
    """Fixed-point search ``mu <- p * denominator(mu)`` starting from ``mu = p``.

    The iteration is run for ``p * (1 + inflate)`` so the returned ``mu``
    satisfies the criterion for ``p`` with a margin larger than rounding.
    Returns None when the iteration diverges or hits the iteration cap.
    """
    p = _as_vector(p, g.n_vertices, "p")
    denominator = fp_denominator if criterion == "fernandez_procacci" else dobrushin_denominator
    for factor in (1.0 + inflate, 1.0):
        target = p * factor
        mu = target.copy()
        for _ in range(MU_ITER_CAP):
            new = np.array([target[x] * denominator(g, mu, x) for x in range(g.n_vertices)])
            if not np.all(np.isfinite(new)) or new.max(initial=0.0) > 1e12:
                break
            if np.allclose(new, mu, rtol=1e-14, atol=0.0):
                return new
            mu = new
        log.debug("mu search did not converge for factor %r", factor)
    return None


def check_auto(g: DependencyGraph, p, criterion: str = "fernandez_procacci") -> ConvergenceReport:
    """Run a criterion with ``mu`` from :func:`search_mu` (all-fail report if none)."""
    p = _as_vector(p, g.n_vertices, "p")
    check = check_fp if criterion == "fernandez_procacci" else check_dobrushin
    mu = search_mu(g, p, criterion)
    if mu is None:
        verdicts = [VertexVerdict(x, False, None, None) for x in range(g.n_vertices)]
        return ConvergenceReport(criterion, verdicts, None, _xi_minus_p_or_none(g, p), None,
                                 {"mu_search": "diverged"})
    report = check(g, p, mu)
    report.extra["mu_search"] = "converged"
    return report


def _denominator_tables(g: DependencyGraph, criterion: str):
    """Stack the subsets summed by each vertex's denominator as 0/1 rows."""
    rows, owners = [], []
    for x in range(g.n_vertices):
        if criterion == "fernandez_procacci":
            subsets = independent_subsets_of(g, g.star_mask(x))
        else:
            star = g.star_mask(x)
            subsets = (s for s in range(1 << g.n_vertices) if s & ~star == 0)
        for s in subsets:
            rows.append([(s >> y) & 1 for y in range(g.n_vertices)])
            owners.append(x)
    return np.array(rows, dtype=bool), np.array(owners)


def fp_threshold(g: DependencyGraph, direction=None, criterion: str = "fernandez_procacci",
                 tol: float = 1e-10) -> float:
    """Largest ``t`` such that some ``mu`` certifies ``t * direction``.

    A certificate exists iff ``mu = t d * denominator(mu)`` has a finite
    nonnegative solution.  The denominators are polynomials with nonnegative
    coefficients, so Newton's method from 0 climbs monotonically to the least
    solution, and none exists once the Jacobian's spectral radius reaches 1.
    The threshold itself is found by bisection on ``t``.
    """
    g.require_exact("threshold search")
    d = np.ones(g.n_vertices) if direction is None else _as_vector(direction, g.n_vertices, "direction")
    if np.any(d < 0) or not np.any(d > 0):
        raise InvalidInstanceError("direction must be nonnegative and nonzero")
    rows, owners = _denominator_tables(g, criterion)
    starts = np.flatnonzero(np.r_[True, owners[1:] != owners[:-1]])
    n = g.n_vertices
    eye = np.eye(n)

    def solvable(t):
        target = t * d
        mu = np.zeros(n)
        for _ in range(200):
            factors = np.where(rows, mu, 1.0)
            den = np.add.reduceat(factors.prod(axis=1), starts)
            # d den_x / d mu_y: drop the y factor from the rows containing y
            jac = np.empty((n, n))
            for y in range(n):
                f = factors.copy()
                f[:, y] = 1.0
                jac[:, y] = np.add.reduceat(np.where(rows[:, y], f.prod(axis=1), 0.0), starts)
            jac *= target[:, None]
            if np.max(np.abs(np.linalg.eigvals(jac))) >= 1.0:
                return False
            residual = target * den - mu
            if np.all(residual <= 1e-14 * np.maximum(mu, 1e-300)):
                return True
            mu = mu + np.linalg.solve(eye - jac, residual)
            if not np.all(np.isfinite(mu)) or mu.max() > 1e12:
                return False
        return False

    lo, hi = 0.0, 1.0 / d.max()
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if solvable(mid):
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class ShearerResult:
    in_region: bool
    witness: int | None
    min_xi: float
    marginal: bool
    n_subsets: int
    mode: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d["witness"] = None if self.witness is None else members(self.witness)
        return d


def check_shearer_region(g: DependencyGraph, p, paranoid: bool = False) -> ShearerResult:
    """Zero-free test: ``Xi_Y(-p) > 0`` on every subset the deletion recursion visits.

    With ``paranoid`` every one of the 2^|X| subsets is tested instead.  The
    witness on failure is a smallest violating subset.
    """
    g.require_exact("region check")
    p = _as_vector(p, g.n_vertices, "p")
    if np.any(p < 0):
        raise InvalidInstanceError("probabilities must be nonnegative")
    if paranoid:
        if g.n_vertices > PARANOID_CAP:
            raise CapExceededError(f"paranoid mode capped at {PARANOID_CAP} vertices")
        stars = np.array([g.star_mask(x) for x in range(g.n_vertices)], dtype=np.int64)
        values = kernels.xi_all_subsets(g.n_vertices, stars, -p)
        table = dict(enumerate(values.tolist()))
        mode = "exhaustive"
    else:
        memo = _XiMemo(g, -p)
        memo(g.full_mask)
        table = memo.memo
        mode = "recursion"
    bad = [s for s, v in table.items() if not v > 0]
    min_xi = min(table.values())
    witness = min(bad, key=lambda s: (bin(s).count("1"), s)) if bad else None
    marginal = not bad and min_xi <= MARGINAL
    return ShearerResult(not bad, witness, float(min_xi), bool(marginal), len(table), mode)


def mt_bounds(g: DependencyGraph, p, paranoid: bool = False) -> ConvergenceReport:
    """Expected-resampling bounds ``T_x = p_x * Pi_x(-p)`` for ``p`` in the region.

    Also reports ``Xi_X(-p)`` (a lower bound on the probability that no event
    occurs) and ``|X| * |pressure(-p)|``.
    """
    p = _as_vector(p, g.n_vertices, "p")
    region = check_shearer_region(g, p, paranoid)
    if not region.in_region:
        raise OutsideRegionError(
            f"p outside the zero-free region; witness {members(region.witness)}",
            witness=region.witness,
        )
    memo = _XiMemo(g, -p)
    xi = memo(g.full_mask)
    verdicts = []
    for x in range(g.n_vertices):
        t = float(p[x]) * memo(g.full_mask & ~g.star_mask(x)) / xi
        verdicts.append(VertexVerdict(x, True, None, t))
    total = float(sum(v.t_bound for v in verdicts))
    extra = {
        "pressure_bound": abs(math.log(xi)),
        "region": region.to_dict(),
    }
    return ConvergenceReport("shearer", verdicts, total, xi, None, extra)


def log_xi_series_term(g: DependencyGraph, w, n: int) -> float:
    """Order-``n`` term of the cluster expansion of ``log Xi`` (tuples of length n)."""
    w = _as_vector(w, g.n_vertices, "w")
    total = 0.0
    for tup in product(range(g.n_vertices), repeat=n):
        phi = ursell_brute(tup, g)
        if phi:
            total += phi * math.prod(float(w[x]) for x in tup)
    return total / math.factorial(n)

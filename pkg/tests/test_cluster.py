import itertools
import json
import math

import numpy as np
import pytest

from mtcluster.cluster import (
    PARANOID_CAP,
    check_auto,
    check_dobrushin,
    check_fp,
    check_shearer_region,
    fp_threshold,
    log_xi_series_term,
    mt_bounds,
    partition_function,
    pi_exact,
    pi_series_truncated,
    pressure,
    search_mu,
)
from mtcluster.depgraph import DependencyGraph
from mtcluster.errors import CapExceededError, InvalidInstanceError, OutsideRegionError


def brute_xi(g, w, domain=None):
    # oracle: sum over every vertex subset that spans no edge
    verts = range(g.n_vertices) if domain is None else domain
    total = 0.0
    for r in range(len(verts) + 1):
        for s in itertools.combinations(verts, r):
            if all(b not in g.adjacency[a] for a, b in itertools.combinations(s, 2)):
                total += math.prod(w[v] for v in s)
    return total


def path(n):
    return DependencyGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def complete(n):
    return DependencyGraph.from_edges(n, itertools.combinations(range(n), 2))


def test_xi_closed_forms():
    fib = [1, 2, 3, 5, 8, 13, 21, 34, 55]
    for n in range(1, 9):
        assert partition_function(path(n), np.ones(n)) == fib[n]
    assert partition_function(complete(5), np.full(5, 0.3)) == pytest.approx(2.5)


def test_xi_matches_brute():
    rng = np.random.default_rng(1)
    for _ in range(40):
        n = int(rng.integers(1, 8))
        edges = [e for e in itertools.combinations(range(n), 2) if rng.random() < 0.4]
        g = DependencyGraph.from_edges(n, edges)
        w = rng.uniform(-0.3, 1.0, n)
        assert partition_function(g, w) == pytest.approx(brute_xi(g, w), rel=1e-12, abs=1e-12)
        dom = [v for v in range(n) if rng.random() < 0.6]
        mask = sum(1 << v for v in dom)
        assert partition_function(g, w, mask) == pytest.approx(brute_xi(g, w, dom), abs=1e-12)


def test_xi_rejects_bad_input(path4):
    with pytest.raises(InvalidInstanceError):
        partition_function(path4, [1.0, 2.0])
    with pytest.raises(InvalidInstanceError):
        partition_function(path4, [1.0, np.nan, 0, 0])
    with pytest.raises(InvalidInstanceError):
        partition_function(path4, np.ones(4), 1 << 7)


def test_pressure(triangle):
    assert pressure(triangle, [0.1] * 3) == pytest.approx(math.log(1.3) / 3)
    with pytest.raises(OutsideRegionError):
        pressure(triangle, [-0.4] * 3)


def test_pi_exact_closed_form():
    g = complete(1)
    assert pi_exact(g, 0, [-0.25]) == pytest.approx(1 / 0.75)
    # Pi is d log Xi / d w_x
    g = path(4)
    w = np.array([0.1, -0.05, 0.2, 0.07])
    h = 1e-6
    wp, wm = w.copy(), w.copy()
    wp[1] += h
    wm[1] -= h
    deriv = (math.log(partition_function(g, wp)) - math.log(partition_function(g, wm))) / (2 * h)
    assert pi_exact(g, 1, w) == pytest.approx(deriv, rel=1e-7)


def test_series_reaches_ratio_at_small_activity(path4):
    rho = np.full(4, 0.05)
    sums = pi_series_truncated(path4, 1, rho, 10)
    assert all(b >= a for a, b in zip(sums, sums[1:]))
    assert sums[-1] == pytest.approx(pi_exact(path4, 1, -rho), abs=1e-8)


def test_series_single_vertex_is_geometric():
    # Pi(-r) = 1/(1-r) and every tree on one point contributes r^n
    sums = pi_series_truncated(complete(1), 0, [0.5], 10)
    assert sums == pytest.approx([sum(0.5 ** k for k in range(n + 1)) for n in range(11)])


def test_series_argument_checks(path4):
    with pytest.raises(InvalidInstanceError):
        pi_series_truncated(path4, 0, [-0.1] * 4, 3)
    with pytest.raises(CapExceededError):
        pi_series_truncated(path4, 0, [0.1] * 4, 11)


def test_log_series_terms_sum_to_log_xi(triangle, path4):
    for g in (triangle, path4):
        w = np.full(g.n_vertices, 0.02)
        approx = sum(log_xi_series_term(g, w, n) for n in range(1, 6))
        assert approx == pytest.approx(math.log(partition_function(g, w)), abs=1e-8)


def test_dobrushin_implies_fp_on_examples(path4):
    mu = [0.2] * 4
    p = [0.99 * 0.2 / 1.2 ** 3] * 4
    assert check_dobrushin(path4, p, mu).passed
    assert check_fp(path4, p, mu).passed


def test_fp_denominator_smaller_than_dobrushin(triangle):
    # K3 at mu=1: Dobrushin 8, FP 1 + 3 = 4, so 0.2 passes FP only
    rep_d = check_dobrushin(triangle, [0.2] * 3, [1.0] * 3)
    rep_f = check_fp(triangle, [0.2] * 3, [1.0] * 3)
    assert not rep_d.passed and rep_f.passed
    assert rep_f.total_bound == 3.0
    assert [v.t_bound for v in rep_f.per_vertex] == [1.0, 1.0, 1.0]
    assert rep_d.total_bound is None


def test_report_json_roundtrip(triangle):
    rep = check_fp(triangle, [0.2] * 3, [1.0] * 3)
    doc = json.loads(rep.to_json())
    assert doc == rep.to_dict()
    assert set(doc) >= {"criterion", "per_vertex", "total_bound", "xi_at_minus_p"}
    assert set(doc["per_vertex"][0]) == {"id", "pass", "slack", "t_bound"}


def test_search_mu_fixed_point():
    g = complete(1)
    mu = search_mu(g, [0.125])
    assert mu[0] == pytest.approx(0.125 / 0.875, rel=1e-8)
    assert check_auto(g, [0.125]).passed
    assert search_mu(complete(2), [0.6, 0.6]) is None
    rep = check_auto(complete(2), [0.6, 0.6])
    assert not rep.passed and rep.extra["mu_search"] == "diverged"


def test_zero_probabilities(path4):
    rep = check_auto(path4, np.zeros(4))
    assert rep.passed
    b = mt_bounds(path4, np.zeros(4))
    assert [v.t_bound for v in b.per_vertex] == [0.0] * 4


def test_shearer_triangle_witness(triangle):
    res = check_shearer_region(triangle, [0.4] * 3)
    assert not res.in_region
    assert res.witness == 0b111
    assert res.min_xi == pytest.approx(1 - 3 * 0.4)
    with pytest.raises(OutsideRegionError) as info:
        mt_bounds(triangle, [0.4] * 3)
    assert info.value.witness == 0b111
    assert check_shearer_region(triangle, [0.3] * 3).in_region


def test_shearer_paranoid_agrees():
    rng = np.random.default_rng(3)
    for _ in range(30):
        n = int(rng.integers(1, 7))
        g = DependencyGraph.from_edges(n, [e for e in itertools.combinations(range(n), 2)
                                           if rng.random() < 0.5])
        p = rng.uniform(0, 0.45, n)
        a = check_shearer_region(g, p)
        b = check_shearer_region(g, p, paranoid=True)
        assert a.in_region == b.in_region
        assert b.n_subsets == 1 << n


def test_paranoid_cap():
    g = DependencyGraph.from_edges(PARANOID_CAP + 1, [])
    with pytest.raises(CapExceededError):
        check_shearer_region(g, np.zeros(PARANOID_CAP + 1), paranoid=True)


def test_mt_bounds_single_clause():
    b = mt_bounds(complete(1), [0.125])
    assert b.total_bound == pytest.approx(0.125 / 0.875)
    assert b.xi_at_minus_p == pytest.approx(0.875)


def test_mt_bounds_dominated_by_fp_mu(path4):
    p = np.full(4, 0.1)
    fp = check_auto(path4, p)
    assert fp.passed
    b = mt_bounds(path4, p)
    for v, f in zip(b.per_vertex, fp.per_vertex):
        assert v.t_bound <= f.t_bound + 1e-9


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_threshold_on_cliques(n):
    assert fp_threshold(complete(n)) == pytest.approx(1 / n, abs=1e-8)


def test_dobrushin_threshold_k3():
    # max of mu/(1+mu)^3 is 4/27 at mu = 1/2
    assert fp_threshold(complete(3), criterion="dobrushin") == pytest.approx(4 / 27, abs=1e-8)

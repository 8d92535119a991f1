import itertools
import json

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from mtcluster.cluster import check_dobrushin, check_fp, check_shearer_region, partition_function
from mtcluster.depgraph import DependencyGraph
from mtcluster.mt_engine import ExecutionLog, run_mt
from mtcluster.instances import CnfFormula, parse_dimacs, sat_to_lll
from mtcluster.penrose import ursell_brute, ursell_penrose, verify_partition_scheme


@st.composite
def graphs(draw, max_n=5):
    n = draw(st.integers(1, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return DependencyGraph.from_edges(n, chosen)


@st.composite
def graph_and_tuple(draw):
    g = draw(graphs())
    tup = draw(st.lists(st.integers(0, g.n_vertices - 1), min_size=1, max_size=5))
    return g, tuple(tup)


@settings(max_examples=150, deadline=None)
@given(graph_and_tuple())
def test_ursell_identity_property(gt):
    g, tup = gt
    assert ursell_brute(tup, g) == ursell_penrose(tup, g)
    assert verify_partition_scheme(tup, g)


@settings(max_examples=100, deadline=None)
@given(graphs(), st.data())
def test_xi_multiplicative_over_components(g, data):
    # adding an isolated vertex multiplies Xi by (1 + w)
    w = data.draw(st.lists(st.floats(-0.3, 1.0), min_size=g.n_vertices + 1,
                           max_size=g.n_vertices + 1))
    bigger = DependencyGraph.from_edges(g.n_vertices + 1, g.edges)
    lhs = partition_function(bigger, w)
    rhs = partition_function(g, w[:-1]) * (1 + w[-1])
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


@settings(max_examples=150, deadline=None)
@given(graphs(), st.data())
def test_criteria_hierarchy_property(g, data):
    n = g.n_vertices
    mu = np.array(data.draw(st.lists(st.floats(0, 2), min_size=n, max_size=n)))
    p = np.array(data.draw(st.lists(st.floats(0, 0.5), min_size=n, max_size=n)))
    d, f = check_dobrushin(g, p, mu), check_fp(g, p, mu)
    if d.passed:
        assert f.passed
    if f.passed:
        assert check_shearer_region(g, p).in_region


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.lists(st.lists(st.integers(1, 6).flatmap(
    lambda v: st.sampled_from([v, -v])), min_size=1, max_size=3), min_size=1, max_size=6),
    st.integers(0, 2**32 - 1))
def test_run_solves_or_caps(n_vars, raw, seed):
    clauses = tuple(tuple(l for l in c if abs(l) <= n_vars) or (1,) for c in raw)
    f = CnfFormula(n_vars, clauses)
    if not any(-lit in c for c in clauses for lit in c):
        assert parse_dimacs(f.to_dimacs()) == f
    m, events, g = sat_to_lll(f)
    log = run_mt(m, events, g, seed=seed, step_cap=2000)
    if log.terminated:
        assert f.satisfied_by(log.assignment)
    assert ExecutionLog.from_dict(json.loads(log.to_json())) == log

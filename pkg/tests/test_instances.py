import itertools
import warnings

import numpy as np
import pytest

from mtcluster.errors import DimacsError, InvalidInstanceError
from mtcluster.instances import (
    CnfFormula,
    Hypergraph,
    hypergraph_coloring_to_lll,
    parse_dimacs,
    parse_hypergraph,
    random_ksat,
    sat_to_lll,
)
from mtcluster.mt_engine import event_probabilities, exact_event_probability, run_mt

SAMPLE = """c sample
p cnf 4 3
1 -2 0
2 3 -4 0
-1
4 0
"""


def test_parse_dimacs_roundtrip():
    f = parse_dimacs(SAMPLE)
    assert f.n_vars == 4
    assert f.clauses == ((1, -2), (2, 3, -4), (-1, 4))
    assert parse_dimacs(f.to_dimacs()) == f


@pytest.mark.parametrize("text,match", [
    ("1 2 0\n", "before header"),
    ("", "missing header"),
    ("p cnf x 1\n1 0\n", "malformed"),
    ("p dnf 2 1\n1 0\n", "malformed"),
    ("p cnf 2 2\n1 0\n", "announces"),
    ("p cnf 2 1\n0\n", "empty clause"),
    ("p cnf 2 1\n3 0\n", "out of range"),
    ("p cnf 2 1\n1 2\n", "not terminated"),
    ("p cnf 2 1\n1 a 0\n", "bad literal"),
])
def test_parse_dimacs_errors(text, match):
    with pytest.raises(DimacsError, match=match):
        parse_dimacs(text)


def test_tautology_warns_and_has_zero_probability():
    with pytest.warns(UserWarning, match="tautological"):
        f = parse_dimacs("p cnf 2 1\n1 -1 2 0\n")
    m, events, g = sat_to_lll(f)
    assert events[0].p == 0.0
    assert exact_event_probability(events[0], m) == 0.0


def test_clause_events_match_enumeration():
    # oracle: the event holds exactly when the clause is falsified
    f = parse_dimacs(SAMPLE)
    m, events, g = sat_to_lll(f)
    for bits in itertools.product((False, True), repeat=4):
        for c, e in zip(f.clauses, events):
            falsified = not any(bits[abs(l) - 1] == (l > 0) for l in c)
            assert e.predicate(tuple(bits[v] for v in e.vbl)) == falsified
    probs = event_probabilities(events, m)
    exact = [exact_event_probability(e, m) for e in events]
    assert list(probs) == exact == [0.25, 0.125, 0.25]
    assert g.edges == [(0, 1), (0, 2), (1, 2)]


def test_repeated_literal_in_clause():
    f = CnfFormula(2, ((1, 1, 2),))
    m, events, _ = sat_to_lll(f)
    assert events[0].p == 0.25 == exact_event_probability(events[0], m)


def test_random_ksat_shape_and_determinism():
    a = random_ksat(50, 30, 3, seed=7)
    assert a == random_ksat(50, 30, 3, seed=7)
    assert a != random_ksat(50, 30, 3, seed=8)
    assert len(a.clauses) == 30
    for c in a.clauses:
        vs = [abs(l) for l in c]
        assert len(set(vs)) == 3 and vs == sorted(vs)
    with pytest.raises(InvalidInstanceError):
        random_ksat(2, 1, 3, seed=0)


def test_random_ksat_overlap_degree():
    f = random_ksat(50, 30, 3, seed=7)
    _, _, g = sat_to_lll(f)
    degrees = [g.degree(x) for x in range(g.n_vertices)]
    assert max(degrees) <= 3 * 29
    assert len(degrees) == 30


def test_hypergraph_parse_and_events():
    h = parse_hypergraph("c x\nh 5 2\n0 1 2\n2 3 4\n")
    assert h == Hypergraph(5, ((0, 1, 2), (2, 3, 4)))
    m, events, g = hypergraph_coloring_to_lll(h)
    assert [e.p for e in events] == [0.25, 0.25]
    assert [exact_event_probability(e, m) for e in events] == [0.25, 0.25]
    assert g.edges == [(0, 1)]
    log = run_mt(m, events, g, seed=1)
    colors = log.assignment
    for e in h.edges:
        assert len({colors[v] for v in e}) == 2


@pytest.mark.parametrize("text", ["", "h 3\n", "g 3 1\n0 1\n", "h 3 2\n0 1\n", "h 3 1\n0 x\n"])
def test_hypergraph_parse_errors(text):
    with pytest.raises(DimacsError):
        parse_hypergraph(text)


def test_hypergraph_validation():
    with pytest.raises(InvalidInstanceError):
        Hypergraph(3, ((0,),))
    with pytest.raises(InvalidInstanceError):
        Hypergraph(3, ((0, 0),))
    with pytest.raises(InvalidInstanceError):
        Hypergraph(3, ((0, 5),))

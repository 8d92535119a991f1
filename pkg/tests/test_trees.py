import math
from collections import Counter

import networkx as nx
import pytest

from mtcluster.errors import CapExceededError, InvalidInstanceError
from mtcluster.trees import (
    LABELED_CAP,
    LabeledRootedTree,
    PlaneRootedTree,
    count_unlabeled,
    enumerate_labeled_trees,
    enumerate_plane_trees,
    map_m,
    map_theta,
    plane_order_compare,
    plane_tree_arrays,
    preimage_size_of_m,
    unlabeled_key,
)

# rooted unlabeled trees with n+1 vertices, n = 0..6
ROOTED_UNLABELED = [1, 1, 2, 4, 9, 20, 48]


def catalan(n):
    return math.comb(2 * n, n) // (n + 1)


@pytest.mark.parametrize("n", range(8))
def test_plane_count_is_catalan(n):
    trees = list(enumerate_plane_trees(n))
    assert len(trees) == catalan(n)
    assert len({t.to_string() for t in trees}) == len(trees)


@pytest.mark.parametrize("n", range(6))
def test_labeled_count_is_cayley(n):
    trees = list(enumerate_labeled_trees(n))
    assert len(trees) == round((n + 1) ** (n - 1))
    assert len({t.edges for t in trees}) == len(trees)
    for t in trees:
        g = nx.Graph(list(t.edges))
        g.add_nodes_from(range(n + 1))
        assert nx.is_tree(g)


@pytest.mark.parametrize("n", range(7))
def test_unlabeled_counts(n):
    assert count_unlabeled(n) == ROOTED_UNLABELED[n]


def test_four_vertex_counts():
    assert (len(list(enumerate_plane_trees(3))), len(list(enumerate_labeled_trees(3))),
            count_unlabeled(3)) == (5, 16, 4)


def test_n2_order_and_strings():
    assert [t.to_string() for t in enumerate_plane_trees(2)] == ["(()())", "((()))"]
    assert [t.to_string() for t in enumerate_plane_trees(0)] == ["()"]


@pytest.mark.parametrize("n", range(6))
def test_preimage_law_by_brute_count(n):
    # oracle: push every labeled tree through m and count fibres
    fibres = Counter(map_m(th) for th in enumerate_labeled_trees(n))
    for t in enumerate_plane_trees(n):
        assert fibres[t] == preimage_size_of_m(t)
    assert sum(fibres.values()) == sum(preimage_size_of_m(t) for t in enumerate_plane_trees(n))


@pytest.mark.parametrize("n", range(7))
def test_m_after_theta_is_identity(n):
    for t in enumerate_plane_trees(n):
        assert map_m(map_theta(t)) == t


def test_natural_labeling_enforced():
    with pytest.raises(InvalidInstanceError):
        PlaneRootedTree(((2,), (), ()))
    with pytest.raises(InvalidInstanceError):
        PlaneRootedTree(((1,), (), ()))


def test_string_roundtrip_and_errors():
    t = PlaneRootedTree.from_string("((())())")
    assert t.to_string() == "((())())"
    assert t.parent == (-1, 0, 0, 1)
    assert t.depth == (0, 1, 1, 2)
    for bad in ("", "(()", "())", "()()", "(x)"):
        with pytest.raises(InvalidInstanceError):
            PlaneRootedTree.from_string(bad)


def test_plane_order_is_label_order():
    t = PlaneRootedTree.from_string("((())())")
    assert plane_order_compare(t, 1, 3) == -1
    assert plane_order_compare(t, 2, 2) == 0
    with pytest.raises(InvalidInstanceError):
        plane_order_compare(t, 0, 9)


def test_labeled_tree_ranks():
    # 0 -> {3, 1}, 3 -> {2}: plane order is 0, 1, 3, 2
    th = LabeledRootedTree((-1, 0, 3, 0))
    assert th.bfs_order == (0, 1, 3, 2)
    assert th.ranks == (0, 1, 3, 2)
    assert th.depth == (0, 1, 2, 1)
    assert map_m(th).to_string() == "(()(()))"


def test_labeled_tree_validation():
    with pytest.raises(InvalidInstanceError):
        LabeledRootedTree((0, 0))
    with pytest.raises(InvalidInstanceError):
        LabeledRootedTree((-1, 2, 1))
    with pytest.raises(InvalidInstanceError):
        LabeledRootedTree.from_edges(3, [(0, 1), (0, 1), (2, 3)])


def test_unlabeled_key_forgets_order():
    a = PlaneRootedTree.from_string("((())())")
    b = PlaneRootedTree.from_string("(()(()))")
    assert a != b and unlabeled_key(a) == unlabeled_key(b)


def test_caps():
    with pytest.raises(CapExceededError):
        list(enumerate_labeled_trees(LABELED_CAP + 1))
    with pytest.raises(InvalidInstanceError):
        list(enumerate_plane_trees(-1))


def test_kernel_arrays_weights():
    parents, depths, weights = plane_tree_arrays(4)
    assert parents.shape == (catalan(4), 5)
    assert not parents.flags.writeable
    # sum of n!/prod s_v! over plane trees is Cayley
    assert round(sum(weights) * math.factorial(4)) == 5 ** 3

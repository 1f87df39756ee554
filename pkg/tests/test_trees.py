import itertools
import math

import pytest

from tqmhom.trees import (Tree, automorphism_order, enumerate_labeled_trees, enumerate_trees, labelings, leaf,
                          node, parse_tree)


# independent oracle: rooted trees as parent arrays, canonical form by sorted nesting strings

def _parent_arrays(n_nodes):
    for parents in itertools.product(*(range(k) for k in range(1, n_nodes))):
        yield (-1,) + parents


def _children(parents):
    kids = {k: [] for k in range(len(parents))}
    for k, p in enumerate(parents):
        if p >= 0:
            kids[p].append(k)
    return kids


def _ahu(kids, v):
    return "(" + "".join(sorted(_ahu(kids, c) for c in kids[v])) + ")"


def oracle_shapes(n_leaves, arities, max_internal):
    found = set()
    for n_nodes in range(n_leaves + 1, n_leaves + max_internal + 1):
        for parents in _parent_arrays(n_nodes):
            kids = _children(parents)
            internal = [v for v in kids if kids[v]]
            if len(kids) - len(internal) != n_leaves:
                continue
            if all(len(kids[v]) in arities for v in internal):
                found.add(_ahu(kids, 0))
    return found


def to_parents(tree):
    parents = []

    def go(t, p):
        me = len(parents)
        parents.append(p)
        for c in t.children:
            go(c, me)

    go(tree, -1)
    return parents


def oracle_automorphisms(tree):
    parents = to_parents(tree)
    n = len(parents)
    count = 0
    for perm in itertools.permutations(range(1, n)):
        s = (0,) + perm
        if all(parents[s[k]] == s[parents[k]] for k in range(1, n)):
            count += 1
    return count


def test_two_leaves_binary():
    trees = enumerate_trees(2, {2})
    assert [t.text() for t in trees] == ["(m2 L L)"]


def test_three_leaves_binary():
    (t,) = enumerate_trees(3, {2})
    assert t.n_vertices == 2 and t.n_edges == 1
    assert len(labelings(t)) == 3


def test_unary_chains():
    trees = enumerate_trees(1, {1}, 3)
    assert sorted(t.n_vertices for t in trees) == [1, 2, 3]
    assert all(t.arities() == [1] * t.n_vertices for t in trees)


def test_unary_needs_bound():
    with pytest.raises(ValueError):
        enumerate_trees(2, {1, 2})


@pytest.mark.parametrize("n,count", [(2, 1), (3, 1), (4, 2), (5, 3), (6, 6)])
def test_binary_shape_counts(n, count):
    trees = enumerate_trees(n, {2})
    assert len(trees) == count
    if n <= 5:
        assert len(oracle_shapes(n, {2}, n - 1)) == count


@pytest.mark.parametrize("n,arities,vmax", [(3, {2, 3}, 2), (4, {2, 3}, 3), (4, {2, 3, 4}, 3),
                                            (2, {1, 2}, 3), (3, {1, 2}, 3), (3, {1, 3}, 3)])
def test_shapes_match_oracle(n, arities, vmax):
    trees = enumerate_trees(n, arities, vmax)
    assert len(trees) == len(set(trees))
    oracle = oracle_shapes(n, arities, vmax)
    assert {_ahu(_children(to_parents(t)), 0) for t in trees} == oracle


def test_automorphism_examples():
    chain = node(node(leaf()))
    assert automorphism_order(chain) == 1
    assert automorphism_order(node(leaf(), leaf())) == 2
    balanced = node(node(leaf(), leaf()), node(leaf(), leaf()))
    assert automorphism_order(balanced) == 8


@pytest.mark.parametrize("n,arities,vmax", [(4, {2}, 3), (5, {2}, 4), (4, {2, 3}, 3), (3, {1, 2}, 3)])
def test_automorphisms_match_brute_force(n, arities, vmax):
    for t in enumerate_trees(n, arities, vmax):
        assert automorphism_order(t) == oracle_automorphisms(t)


@pytest.mark.parametrize("n,arities,vmax", [(3, {2}, None), (4, {2}, None), (5, {2, 3}, None), (3, {1, 2}, 3)])
def test_labelings_times_automorphisms(n, arities, vmax):
    for t in enumerate_trees(n, arities, vmax):
        assert len(labelings(t)) * automorphism_order(t) == math.factorial(n)


def test_labeled_trees_are_distinct_and_complete():
    out = enumerate_labeled_trees(4, {2})
    # (2n-3)!! labeled binary trees on n leaves
    assert len(out) == 15 == len(set(out))
    assert all(sorted(t.leaf_labels()) == [1, 2, 3, 4] for t in out)


def test_text_round_trip():
    t = node(node(leaf(1)), leaf(2))
    assert t.text() == "(m2 (m1 L1) L2)"
    assert parse_tree(t.text()) == t
    for s in enumerate_labeled_trees(4, {2, 3}):
        assert parse_tree(s.text()) == s
    assert parse_tree("(m2 L L)").shape() == Tree((Tree(), Tree()))


@pytest.mark.parametrize("bad", ["(m2 L1)", "(m2 L1 L2", "(x L1)", "L1 L2", "(m1 L1) junk"])
def test_parse_errors(bad):
    with pytest.raises(ValueError):
        parse_tree(bad)


def test_counts_of_edges_and_leaves():
    t = parse_tree("(m3 (m2 L1 L2) L3 (m1 L4))")
    assert (t.n_leaves, t.n_vertices, t.n_edges) == (4, 3, 2)
    assert t.shape() == parse_tree("(m3 L (m1 L) (m2 L L))").shape()

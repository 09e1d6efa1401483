import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bmtrmld.trees import (
    RootedTree,
    TreeError,
    enumerate_topologies,
    glue,
    load_tree,
    parse_newick,
    star_tree,
)

ALL6 = enumerate_topologies(6)
ALL7 = enumerate_topologies(7)


def test_parse_star():
    t = parse_newick("(1,2,3);")
    assert t.n == 3
    assert list(t.internal) == [4]
    assert t.outdeg(4) == 3
    assert t == star_tree(3)


def test_parse_tree16(tree16):
    assert tree16.n == 5
    assert sorted(tree16.children[6]) == [3, 4, 5]
    assert sorted(tree16.children[7]) == [1, 2, 6]
    assert tree16.parent[7] == 0
    assert tree16.root_child == 7


@pytest.mark.parametrize("text", ["((1,2));", "(1);", "(1,2", "(1,1);", "(1,3);", "(1:0.5,2);", "(1,2);x", ""])
def test_parse_errors(text):
    with pytest.raises(TreeError):
        parse_newick(text)


def test_lca(tree16):
    assert tree16.lca(3, 4) == 6
    assert tree16.lca(1, 2) == 7
    assert tree16.lca(1, 3) == 7
    assert tree16.lca(0, 5) == 0
    for i in range(6):
        assert tree16.lca(i, i) == i
    with pytest.raises(TreeError):
        tree16.lca(1, 9)


def test_path_edges(tree16):
    assert tree16.path_edges(0, 3) == {3, 6, 7}
    assert tree16.path_edges(3, 4) == {3, 4}
    assert tree16.path_edges(1, 5) == {1, 5, 6}
    with pytest.raises((TreeError, ValueError)):
        tree16.path_edges(2, 2)


def test_quartets(tree16):
    q = tree16.quartet_topology((1, 2, 3, 4))
    assert q.resolved and {frozenset(s) for s in q.split} == {frozenset({1, 2}), frozenset({3, 4})}
    assert not tree16.quartet_topology((1, 3, 4, 5)).resolved
    q = tree16.quartet_topology((0, 1, 3, 4))
    assert {frozenset(s) for s in q.split} == {frozenset({0, 1}), frozenset({3, 4})}


def test_topology_counts():
    counts = [len(enumerate_topologies(k, min_leaves=k)) for k in range(3, 9)]
    assert counts == [1, 2, 5, 12, 33, 90]
    labelled = [len(enumerate_topologies(k, min_leaves=k, labeled=True)) for k in range(3, 7)]
    assert labelled == [1, 4, 26, 236]
    assert len(ALL6) == 20 and len(ALL7) == 53
    assert len({t.newick() for t in ALL7}) == len(ALL7)


def test_glue_glued():
    g = glue(star_tree(3), 3, 3)
    assert g.tree == parse_newick("(1,2,(3,4,5));")
    assert g.center == 6
    assert g.h == 4
    assert g.star == star_tree(3)


def test_glue_errors():
    with pytest.raises(TreeError):
        glue(star_tree(3), 0, 3)
    with pytest.raises(TreeError):
        glue(star_tree(3), 4, 3)
    with pytest.raises(TreeError):
        glue(star_tree(3), 1, 1)


def test_roundtrip_serialisation():
    for t in ALL7:
        assert parse_newick(t.newick()) == t
        assert RootedTree.from_dict(t.to_dict()) == t


def test_load_tree(tmp_path, tree16):
    f = tmp_path / "t.nwk"
    f.write_text("(1,2,(3,4,5));\n")
    assert load_tree(str(f)) == tree16
    assert load_tree("(1,2,(3,4,5));") == tree16
    with pytest.raises(OSError):
        load_tree(str(tmp_path / "missing.nwk"))


def test_no_degree_two_invariant():
    for t in ALL7:
        for v in t.internal:
            assert t.outdeg(v) >= 2
        assert set(t.leaves) == set(range(t.n + 1))


trees = st.sampled_from(ALL7)


@given(trees, st.data())
@settings(max_examples=100, deadline=None)
def test_distance_via_depths(t, data):
    i = data.draw(st.integers(0, t.n))
    j = data.draw(st.integers(0, t.n).filter(lambda x: x != i))
    w = t.lca(i, j)
    assert t.distance(i, j) == t.depth[i] + t.depth[j] - 2 * t.depth[w]
    assert len(t.path_edges(i, j)) == t.distance(i, j)
    assert t.lca(i, j) == t.lca(j, i)


@given(trees, st.data())
@settings(max_examples=100, deadline=None)
def test_quartet_invariant_under_order(t, data):
    if t.n < 3:
        return
    q = data.draw(st.lists(st.integers(0, t.n), min_size=4, max_size=4, unique=True))
    a = t.quartet_topology(tuple(q))
    b = t.quartet_topology(tuple(sorted(q)))
    assert a.resolved == b.resolved
    if a.resolved:
        assert {frozenset(s) for s in a.split} == {frozenset(s) for s in b.split}
        # four-point condition: cherries are the pairs with the smallest total distance
        (x, y), (z, w) = a.split
        d = t.distance
        inside = d(x, y) + d(z, w)
        assert inside < d(x, z) + d(y, w) == d(x, w) + d(y, z)


@given(st.sampled_from(enumerate_topologies(5)), st.integers(2, 3), st.data())
@settings(max_examples=50, deadline=None)
def test_glue_counts(tp, m, data):
    ell = data.draw(st.integers(1, tp.n))
    g = glue(tp, ell, m)
    assert g.tree.n == tp.n - 1 + m
    assert len(g.tree.internal) == len(tp.internal) + 1
    assert g.tree.outdeg(g.center) == m
    degs = sorted(g.tree.outdeg(v) for v in g.tree.internal)
    assert degs == sorted([tp.outdeg(v) for v in tp.internal] + [m])


def test_ancestors_descendants(tree16):
    assert list(tree16.ancestors(3)) == [3, 6, 7, 0]
    assert set(tree16.descendant_leaves(7)) == {1, 2, 3, 4, 5}
    assert set(tree16.descendant_internal(7)) == {6, 7}
    assert set(tree16.descendant_internal(6)) == {6}

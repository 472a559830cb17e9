import math

import numpy as np
import pytest

from treehistory.counts import edge_log_counts, seed_probabilities, total_log_histories
from treehistory.oracle import enumerate_histories
from treehistory.tree import parse_edge_list, root_at

from conftest import prufer_tree, shape_suite, single_node_tree, star_tree


def test_path3_seed_probabilities():
    tree = parse_edge_list("a b\nb c")
    dist = seed_probabilities(tree)
    np.testing.assert_allclose(dist.p, [0.25, 0.5, 0.25], atol=1e-12)
    assert dist.log_z == pytest.approx(math.log(4), abs=1e-12)


def test_star4_seed_probabilities():
    dist = seed_probabilities(star_tree(4))
    np.testing.assert_allclose(dist.p, [0.5, 1 / 6, 1 / 6, 1 / 6], atol=1e-12)
    assert dist.log_z == pytest.approx(math.log(12), abs=1e-12)


def test_single_node_seed():
    dist = seed_probabilities(single_node_tree())
    assert dist.p.tolist() == [1.0]
    assert dist.log_z == 0.0
    assert total_log_histories(single_node_tree()) == 0.0


def test_two_node_total():
    tree = parse_edge_list("a b")
    assert total_log_histories(tree) == pytest.approx(math.log(2), abs=1e-12)


def test_root_independence(rng):
    for _ in range(15):
        tree = prufer_tree(int(rng.integers(2, 12)), rng)
        base = seed_probabilities(tree, root=0)
        for root in range(1, tree.n, max(1, tree.n // 3)):
            other = seed_probabilities(tree, root=root)
            np.testing.assert_allclose(other.p, base.p, atol=1e-12)
            assert other.log_z == pytest.approx(base.log_z, abs=1e-9)


def test_adjacent_ratio_identity(rng):
    # adjacent seeds relate by the ratio of the two branch sizes of their edge
    for _ in range(10):
        tree = prufer_tree(int(rng.integers(2, 15)), rng)
        dist = seed_probabilities(tree)
        view = root_at(tree, 0)
        for u, v in tree.edges():
            s = view.branch_size(u, v)
            assert dist.log_p[v] - dist.log_p[u] == pytest.approx(
                math.log(s) - math.log(tree.n - s), abs=1e-12
            )


def test_matches_enumeration(rng):
    for name, tree in shape_suite(max_n=7).items():
        enum = enumerate_histories(tree)
        dist = seed_probabilities(tree)
        np.testing.assert_allclose(
            dist.p, np.array(enum.seed_counts) / enum.total, atol=1e-12, err_msg=name
        )
        assert dist.log_z == pytest.approx(math.log(enum.total), abs=1e-9)
    for _ in range(25):
        tree = prufer_tree(int(rng.integers(2, 9)), rng)
        enum = enumerate_histories(tree)
        dist = seed_probabilities(tree)
        np.testing.assert_allclose(
            dist.p, np.array(enum.seed_counts) / enum.total, atol=1e-12
        )
        assert dist.log_z == pytest.approx(math.log(enum.total), abs=1e-9)


def test_automorphic_nodes_share_probability():
    path = parse_edge_list("a b\nb c\nc d")
    p = seed_probabilities(path).p
    assert p[0] == pytest.approx(p[3], abs=1e-15)
    assert p[1] == pytest.approx(p[2], abs=1e-15)
    star = star_tree(6)
    q = seed_probabilities(star).p
    assert np.ptp(q[1:]) < 1e-15


def test_leaf_branch_has_single_ordering():
    tree = parse_edge_list("a b\nb c")
    counts = edge_log_counts(tree)
    a, b, c = (tree.index(x) for x in "abc")
    assert counts.log_h(b, a) == pytest.approx(0.0, abs=1e-12)
    assert counts.log_h(b, c) == pytest.approx(0.0, abs=1e-12)
    # branch {b, c} seeded at b admits exactly one ordering
    assert counts.log_h(a, b) == pytest.approx(0.0, abs=1e-12)


def test_three_branch_interleaving_count():
    # focal node with branches of sizes 1, 2, 3 whose internal counts are 1, 1, 2:
    # 6!/(1! 2! 3!) = 60 interleavings times 2 internal orderings = 120
    tree = parse_edge_list("f a\nf b\nb b2\nf c\nc c1\nc c2")
    counts = edge_log_counts(tree)
    f = tree.index("f")
    assert counts.log_h_seed[f] == pytest.approx(math.log(120), abs=1e-9)
    enum = enumerate_histories(tree)
    assert enum.seed_counts[f] == 120


def test_seed_counts_sum_to_total(rng):
    for _ in range(10):
        tree = prufer_tree(int(rng.integers(2, 9)), rng)
        counts = edge_log_counts(tree)
        enum = enumerate_histories(tree)
        np.testing.assert_allclose(
            np.exp(counts.log_h_seed), enum.seed_counts, rtol=1e-9
        )
        assert counts.log_z == pytest.approx(math.log(enum.total), abs=1e-9)


def test_edge_counts_match_branch_enumeration(rng):
    # check a couple of directed edges against enumeration of the branch subtree
    from treehistory.tree import build_tree

    for _ in range(8):
        tree = prufer_tree(int(rng.integers(3, 8)), rng)
        counts = edge_log_counts(tree)
        view = root_at(tree, 0)
        for u, v in tree.edges():
            for a, b in ((u, v), (v, u)):
                members = _branch_members(tree, a, b)
                sub = _induced_subtree(tree, members)
                enum = enumerate_histories(sub)
                want = enum.seed_counts[sub.index(str(b))]
                got = counts.log_h(a, b)
                assert got == pytest.approx(math.log(want), abs=1e-9), (a, b)
                # counts are at least one ordering; zero exactly when unique
                assert got >= -1e-12
                assert (abs(got) < 1e-12) == (want == 1)


def _branch_members(tree, u, v):
    members = {v}
    stack = [v]
    while stack:
        x = stack.pop()
        for w in tree.adjacency[x]:
            if w != u and w not in members:
                members.add(w)
                stack.append(w)
    return members


def _induced_subtree(tree, members):
    from treehistory.tree import build_tree

    pairs = [
        (str(a), str(b))
        for a, b in tree.edges()
        if a in members and b in members
    ]
    if not pairs:
        from treehistory.tree import Tree

        (only,) = members
        return Tree([[]], labels=[str(only)], edge_order=[])
    return build_tree(pairs)

import math

import pytest

from treehistory.oracle import (
    EnumerationTooLargeError,
    enumerate_by_filter,
    enumerate_histories,
    exact_kernel_likelihood_sum,
)
from treehistory.tree import is_consistent, parse_edge_list

from conftest import path_tree, prufer_tree, shape_suite, single_node_tree, star_tree


def test_path3_enumeration():
    tree = parse_edge_list("a b\nb c")
    a, b, c = (tree.index(x) for x in "abc")
    enum = enumerate_histories(tree)
    assert enum.total == 4
    assert set(enum.histories) == {(a, b, c), (b, a, c), (b, c, a), (c, b, a)}
    assert enum.seed_counts == [1, 2, 1]


def test_star4_enumeration():
    enum = enumerate_histories(star_tree(4))
    assert enum.total == 12
    assert enum.seed_counts[0] == 6
    assert enum.seed_counts[1:] == [2, 2, 2]


def test_single_node():
    enum = enumerate_histories(single_node_tree())
    assert enum.total == 1
    assert enum.histories == [(0,)]


def test_size_guard():
    with pytest.raises(EnumerationTooLargeError):
        enumerate_histories(path_tree(11))


def test_column_sums_equal_total(rng):
    for _ in range(10):
        tree = prufer_tree(int(rng.integers(2, 8)), rng)
        enum = enumerate_histories(tree)
        for t in range(tree.n):
            assert sum(enum.arrival_counts[i][t] for i in range(tree.n)) == enum.total


def test_every_enumerated_history_is_consistent(rng):
    for _ in range(5):
        tree = prufer_tree(int(rng.integers(2, 7)), rng)
        enum = enumerate_histories(tree)
        for h in enum.histories:
            is_consistent(tree, list(h))


def test_two_enumeration_paths_agree(rng):
    for name, tree in shape_suite(max_n=6).items():
        assert set(enumerate_histories(tree).histories) == set(
            enumerate_by_filter(tree)
        ), name
    for _ in range(10):
        tree = prufer_tree(int(rng.integers(2, 8)), rng)
        assert set(enumerate_histories(tree).histories) == set(enumerate_by_filter(tree))


def test_kernel_sum_gamma_zero_closed_form(rng):
    for _ in range(5):
        tree = prufer_tree(int(rng.integers(2, 8)), rng)
        enum = enumerate_histories(tree)
        expected = enum.total / math.factorial(tree.n - 1)
        assert exact_kernel_likelihood_sum(tree, 0.0) == pytest.approx(expected, rel=1e-12)


def test_kernel_sum_path3_by_hand():
    # every history of the 3-path carries one binary attachment choice
    tree = parse_edge_list("a b\nb c")
    assert exact_kernel_likelihood_sum(tree, 1.0) == pytest.approx(2.0, rel=1e-12)


def test_kernel_sum_star4_by_hand():
    # centre-seeded and leaf-seeded histories each contribute probability 1/4
    assert exact_kernel_likelihood_sum(star_tree(4), 1.0) == pytest.approx(3.0, rel=1e-12)

"""Shared tree builders for the test suite."""

import numpy as np
import pytest

from treehistory.tree import Tree, build_tree


def path_tree(n):
    return build_tree([(str(i), str(i + 1)) for i in range(n - 1)])


def star_tree(n):
    """Node '0' is the centre; n includes the centre."""
    return build_tree([("0", str(i)) for i in range(1, n)])


def caterpillar_tree(spine, legs_per_node=1):
    """Path of `spine` nodes with `legs_per_node` leaves hung on each."""
    pairs = [(f"s{i}", f"s{i + 1}") for i in range(spine - 1)]
    for i in range(spine):
        for j in range(legs_per_node):
            pairs.append((f"s{i}", f"l{i}_{j}"))
    return build_tree(pairs)


def prufer_tree(n, rng):
    """Uniform random labelled tree via Prufer decoding (n >= 2)."""
    if n == 2:
        return build_tree([("0", "1")])
    seq = [int(rng.integers(n)) for _ in range(n - 2)]
    degree = [1] * n
    for v in seq:
        degree[v] += 1
    pairs = []
    import heapq

    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    for v in seq:
        leaf = heapq.heappop(leaves)
        pairs.append((str(leaf), str(v)))
        degree[v] -= 1
        if degree[v] == 1:
            heapq.heappush(leaves, v)
    a = heapq.heappop(leaves)
    b = heapq.heappop(leaves)
    pairs.append((str(a), str(b)))
    return build_tree(pairs)


def shape_suite(max_n=8):
    """Deterministic family of named shapes used across oracle-backed tests."""
    trees = {}
    for n in range(2, max_n + 1):
        trees[f"path{n}"] = path_tree(n)
    for n in range(3, max_n + 1):
        trees[f"star{n}"] = star_tree(n)
    trees["caterpillar6"] = caterpillar_tree(3, 1)
    trees["caterpillar7"] = build_tree(
        [("a", "b"), ("b", "c"), ("c", "d"), ("a", "x"), ("b", "y"), ("c", "z")]
    )
    trees["caterpillar8"] = caterpillar_tree(4, 1)
    trees["broom7"] = build_tree(
        [("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("d", "f"), ("d", "g")]
    )
    return trees


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def single_node_tree():
    return Tree([[]], labels=["solo"], edge_order=[])

from collections import Counter

import numpy as np
import pytest
from scipy.stats import chi2

from treehistory.oracle import enumerate_histories
from treehistory.sampler import (
    BoundarySampler,
    BridgeSampler,
    EmptyBoundaryError,
    HistorySampler,
    InitialNotConnectedError,
    InitialNotSubtreeError,
    sample_bridge,
    sample_history,
)
from treehistory.tree import is_consistent, parse_edge_list

from conftest import prufer_tree, star_tree


def test_boundary_sampler_ratio(rng):
    picker = BoundarySampler(4)
    hits = Counter()
    for _ in range(40_000):
        picker.insert(0, 3)
        picker.insert(1, 1)
        hits[picker.draw(rng)] += 1
        for node in (0, 1):
            if picker.weight(node):
                picker.remove(node)
    assert hits[0] / 40_000 == pytest.approx(0.75, abs=0.01)


def test_boundary_sampler_insert_remove_identity(rng):
    picker = BoundarySampler(8)
    picker.insert(2, 5)
    picker.insert(6, 5)
    picker.insert(3, 7)
    picker.remove(3)
    assert picker.total == 10
    draws = {picker.draw(rng) for _ in range(1)}
    assert draws <= {2, 6}


def test_boundary_sampler_uniform_chi_square(rng):
    picker = BoundarySampler(10)
    hits = np.zeros(10)
    for _ in range(100_000):
        for i in range(10):
            picker.insert(i, 1)
        v = picker.draw(rng)
        hits[v] += 1
        for i in range(10):
            if picker.weight(i):
                picker.remove(i)
    expected = 10_000.0
    stat = float(((hits - expected) ** 2 / expected).sum())
    assert chi2.sf(stat, 9) > 0.001


def test_boundary_sampler_empty_draw():
    with pytest.raises(EmptyBoundaryError):
        BoundarySampler(3).draw(np.random.default_rng(0))


def test_two_node_split(rng):
    tree = parse_edge_list("a b")
    seeds = Counter(sample_history(tree, rng).seed for _ in range(20_000))
    assert seeds[0] / 20_000 == pytest.approx(0.5, abs=0.02)


def test_path3_history_frequencies(rng):
    tree = parse_edge_list("a b\nb c")
    enum = enumerate_histories(tree)
    sampler = HistorySampler(tree)
    hits = Counter(tuple(sampler.sample(rng).order) for _ in range(40_000))
    assert set(hits) == set(enum.histories)
    for h in enum.histories:
        assert hits[h] / 40_000 == pytest.approx(0.25, abs=3 * 0.25 / 100)


def test_star_seed_frequency(rng):
    tree = star_tree(4)
    sampler = HistorySampler(tree)
    seeds = Counter(sampler.sample(rng).seed for _ in range(60_000))
    assert seeds[0] / 60_000 == pytest.approx(0.5, abs=0.01)


def test_uniformity_chi_square_suite(rng):
    # goodness of fit against the enumerated uniform distribution
    trees = [prufer_tree(n, rng) for n in (5, 6, 7)]
    for tree in trees:
        enum = enumerate_histories(tree)
        index = {h: i for i, h in enumerate(enum.histories)}
        hits = np.zeros(enum.total)
        sampler = HistorySampler(tree)
        draws = 30_000
        for _ in range(draws):
            hits[index[tuple(sampler.sample(rng).order)]] += 1
        expected = draws / enum.total
        stat = float(((hits - expected) ** 2 / expected).sum())
        assert chi2.sf(stat, enum.total - 1) > 0.001


def test_weight_sum_identity(rng):
    # after t arrivals the boundary weights must sum to exactly n - t
    tree = prufer_tree(40, rng)
    sampler = HistorySampler(tree)
    n = tree.n
    seed = int(np.searchsorted(sampler._cum, rng.random(), side="right"))
    boundary = BoundarySampler(n)
    parent_of = [-1] * n
    for w in tree.adjacency[seed]:
        parent_of[w] = seed
        boundary.insert(w, sampler._branch_weight(seed, w))
    placed = 1
    while placed < n:
        assert boundary.total == n - placed
        v = boundary.draw(rng)
        placed += 1
        for w in tree.adjacency[v]:
            if w != parent_of[v]:
                parent_of[w] = v
                boundary.insert(w, sampler._branch_weight(v, w))
    assert boundary.total == 0


def test_sampled_histories_are_consistent(rng):
    tree = prufer_tree(25, rng)
    sampler = HistorySampler(tree)
    for _ in range(50):
        hist = sampler.sample(rng)
        again = is_consistent(tree, hist.order)
        assert again.parent_of == hist.parent_of


def test_marginal_frequencies_match_exact_posterior():
    # empirical arrival-time frequencies vs the exact posterior on one n=50
    # tree.  Exact binomial two-sided tails per entry with a Bonferroni bound:
    # 2500 entries at a plain 3-sigma rule would average ~7 false alarms, and
    # the normal approximation is meaningless for the near-zero entries.
    from scipy.stats import binom

    from treehistory.posterior import arrival_posterior

    rng = np.random.default_rng(99)
    tree = prufer_tree(50, rng)
    probs = arrival_posterior(tree).probabilities
    draws = 100_000
    counts = np.zeros_like(probs)
    sampler = HistorySampler(tree)
    for _ in range(draws):
        hist = sampler.sample(rng)
        for v, t in enumerate(hist.arrival):
            counts[v][t] += 1
    lower = binom.cdf(counts, draws, probs)
    upper = binom.sf(counts - 1, draws, probs)
    two_sided = np.minimum(1.0, 2.0 * np.minimum(lower, upper))
    assert float(two_sided.min()) > 0.001 / probs.size
    # z-scores are meaningful where expected counts are large
    bulk = probs * draws >= 10
    se = np.sqrt(probs[bulk] * (1 - probs[bulk]) / draws)
    z = np.abs(counts[bulk] / draws - probs[bulk]) / se
    assert float(z.mean()) < 1.1


def test_determinism():
    tree = prufer_tree(30, np.random.default_rng(5))
    a = sample_history(tree, 123)
    b = sample_history(tree, 123)
    assert a.order == b.order
    c = sample_history(tree, 124)
    assert c.order != a.order


def test_bridge_two_completions(rng):
    tree = parse_edge_list("a b\nb c")
    b = tree.index("b")
    bridge = BridgeSampler(tree, [b])
    hits = Counter(tuple(bridge.sample(rng)) for _ in range(20_000))
    assert set(hits) == {
        (tree.index("a"), tree.index("c")),
        (tree.index("c"), tree.index("a")),
    }
    for count in hits.values():
        assert count / 20_000 == pytest.approx(0.5, abs=0.015)


def test_bridge_full_initial_is_empty(rng):
    tree = parse_edge_list("a b\nb c")
    assert sample_bridge(tree, [0, 1, 2], rng) == []


def test_bridge_rejects_disconnected():
    tree = parse_edge_list("a b\nb c")
    with pytest.raises(InitialNotConnectedError):
        BridgeSampler(tree, [tree.index("a"), tree.index("c")])


def test_bridge_rejects_foreign_nodes():
    tree = parse_edge_list("a b\nb c")
    with pytest.raises(InitialNotSubtreeError):
        BridgeSampler(tree, [0, 7])
    with pytest.raises(InitialNotSubtreeError):
        BridgeSampler(tree, [])


def test_bridge_matches_conditional_enumeration(rng):
    # completions must be uniform over histories extending the snapshot
    for trial in range(3):
        tree = prufer_tree(6, rng)
        enum = enumerate_histories(tree)
        initial = [enum.histories[0][0]]
        completions = Counter()
        want = set()
        init_set = set(initial)
        for h in enum.histories:
            if set(h[: len(initial)]) == init_set:
                want.add(h[len(initial) :])
        bridge = BridgeSampler(tree, initial)
        draws = 30_000
        for _ in range(draws):
            completions[tuple(bridge.sample(rng))] += 1
        assert set(completions) == want
        if len(want) == 1:
            continue
        expected = draws / len(want)
        stat = sum((c - expected) ** 2 / expected for c in completions.values())
        assert chi2.sf(stat, len(want) - 1) > 0.001

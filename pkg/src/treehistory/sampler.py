"""Exact uniform sampling of histories, including bridges between snapshots.

A history is generated forward: draw the seed proportional to its exact seed
probability, then repeatedly draw the next arrival from the boundary (absent
nodes whose neighbour toward the seed is present) proportional to the size of
the branch hanging below it.  The product of step probabilities is the same
for every feasible history, so the draw is exactly uniform.  Each complete
sample costs O(n log n).
"""

from __future__ import annotations

import numpy as np

from .counts import seed_probabilities
from .seeding import as_generator
from .tree import History, TreeHistoryError, root_at


class EmptyBoundaryError(TreeHistoryError):
    pass


class InitialNotSubtreeError(TreeHistoryError):
    pass


class InitialNotConnectedError(TreeHistoryError):
    pass


class DegenerateWeightsError(TreeHistoryError):
    """Importance weights collapsed onto too few samples to be usable."""


class BoundarySampler:
    """Integer-weighted sampling index with O(log n) insert, remove and draw.

    A Fenwick tree over node slots.  Weights are kept as exact integers so
    the running total is exact: after t arrivals the boundary weights of a
    growing tree must sum to exactly n - t.
    """

    __slots__ = ("_fen", "_weight", "_cap", "total")

    def __init__(self, capacity):
        self._cap = capacity
        self._fen = [0] * (capacity + 1)
        self._weight = [0] * capacity
        self.total = 0

    def _add(self, i, delta):
        i += 1
        fen = self._fen
        while i <= self._cap:
            fen[i] += delta
            i += i & (-i)

    def insert(self, node, weight):
        if self._weight[node]:
            raise ValueError(f"node {node} already present")
        if weight <= 0:
            raise ValueError("weight must be positive")
        self._weight[node] = weight
        self.total += weight
        self._add(node, weight)

    def remove(self, node):
        w = self._weight[node]
        if not w:
            raise KeyError(node)
        self._weight[node] = 0
        self.total -= w
        self._add(node, -w)

    def weight(self, node):
        return self._weight[node]

    def draw(self, rng):
        """Node k with probability weight(k) / total; the drawn node is removed."""
        if self.total <= 0:
            raise EmptyBoundaryError("draw from an empty boundary")
        r = int(rng.integers(self.total))
        pos = 0
        bit = 1 << (self._cap.bit_length() - 1)
        fen = self._fen
        while bit:
            nxt = pos + bit
            if nxt <= self._cap and fen[nxt] <= r:
                pos = nxt
                r -= fen[nxt]
            bit >>= 1
        self.remove(pos)
        return pos


class HistorySampler:
    """Reusable uniform history sampler for one tree.

    Precomputes the seed distribution and a single rooted view; per-sample
    work is the boundary loop only.  One instance is single-threaded; create
    one per worker (with split rng streams) for parallel sampling.
    """

    def __init__(self, tree):
        self.tree = tree
        self.seed_distribution = seed_probabilities(tree)
        self._cum = np.cumsum(self.seed_distribution.p)
        self._view = root_at(tree, 0)

    def _branch_weight(self, u, v):
        # size of v's side of edge (u, v): orientation-resolved from the
        # fixed rooting, valid for any seed
        view = self._view
        if view.parent[v] == u:
            return view.subtree[v]
        return self.tree.n - view.subtree[u]

    def sample(self, rng=None):
        rng = as_generator(rng)
        tree = self.tree
        n = tree.n
        seed = int(np.searchsorted(self._cum, rng.random(), side="right"))
        if seed >= n:  # guard against cumulative rounding at the top end
            seed = n - 1
        order = [seed]
        arrival = [-1] * n
        arrival[seed] = 0
        parent_of = [-1] * n
        if n == 1:
            return History(order, arrival, parent_of)
        boundary = BoundarySampler(n)
        for w in tree.adjacency[seed]:
            parent_of[w] = seed
            boundary.insert(w, self._branch_weight(seed, w))
        for t in range(1, n):
            v = boundary.draw(rng)
            order.append(v)
            arrival[v] = t
            pv = parent_of[v]
            for w in tree.adjacency[v]:
                if w != pv:
                    parent_of[w] = v
                    boundary.insert(w, self._branch_weight(v, w))
        return History(order, arrival, parent_of)


def sample_history(tree, rng=None):
    """One uniform draw from the feasible histories of the tree."""
    return HistorySampler(tree).sample(rng)


def sample_histories(tree, count, rng=None):
    """Convenience bulk draw sharing one sampler instance and rng stream."""
    rng = as_generator(rng)
    sampler = HistorySampler(tree)
    return [sampler.sample(rng) for _ in range(count)]


class BridgeSampler:
    """Uniform sampler over completions from a known initial subtree.

    `initial` is a collection of node indices that must induce a connected
    subtree of the final tree.  Each sample is the ordered arrival sequence
    of the remaining nodes, uniform over feasible completions.
    """

    def __init__(self, tree, initial):
        initial = list(initial)
        if not initial:
            raise InitialNotSubtreeError("initial set is empty")
        n = tree.n
        mask = bytearray(n)
        for v in initial:
            if not 0 <= v < n:
                raise InitialNotSubtreeError(f"node {v} not in the tree")
            mask[v] = 1
        # connectivity of the induced subgraph
        seen = 1
        stack = [initial[0]]
        visited = bytearray(n)
        visited[initial[0]] = 1
        while stack:
            u = stack.pop()
            for w in tree.adjacency[u]:
                if mask[w] and not visited[w]:
                    visited[w] = 1
                    seen += 1
                    stack.append(w)
        size = sum(mask)
        if seen != size:
            raise InitialNotConnectedError(
                f"initial set induces {size - seen + 1} components"
            )
        self.tree = tree
        self.initial = initial
        self._mask = mask
        self._view = root_at(tree, initial[0])
        self._frontier = [
            v for v in range(n) if not mask[v] and mask[self._view.parent[v]]
        ]

    def sample(self, rng=None):
        """Arrival sequence of the nodes outside the initial snapshot."""
        rng = as_generator(rng)
        tree = self.tree
        n = tree.n
        view = self._view
        remaining = n - sum(self._mask)
        if remaining == 0:
            return []
        boundary = BoundarySampler(n)
        for v in self._frontier:
            boundary.insert(v, view.subtree[v])
        seq = []
        present = bytearray(self._mask)
        for _ in range(remaining):
            v = boundary.draw(rng)
            present[v] = 1
            seq.append(v)
            for w in tree.adjacency[v]:
                if not present[w] and view.parent[w] == v:
                    boundary.insert(w, view.subtree[w])
        return seq


def sample_bridge(tree, initial, rng=None):
    """One uniform completion from the snapshot `initial` to the full tree."""
    return BridgeSampler(tree, initial).sample(rng)

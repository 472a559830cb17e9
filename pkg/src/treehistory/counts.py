"""Seed probabilities and log-domain counts of feasible branch orderings.

For a directed edge (u -> v), the branch of v is the component containing v
when the edge is cut.  The central quantity is the number of orderings of
that branch which start at v and stay feasible (each later node adjacent to
an earlier one).  Whole-tree counts follow by multiplying branch counts and
the multinomial number of ways to interleave the branches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .logmath import log_factorials
from .tree import DirectedEdgeIndex, root_at


@dataclass
class SeedDistribution:
    """Probability that each node was the first to arrive.

    log_z is the log of the total number of feasible histories of the tree.
    """

    p: np.ndarray
    log_p: np.ndarray
    log_z: float


def _propagate_seed_ratios(tree, view):
    """Unnormalized log seed weights down an arbitrary rooting (root = 0).

    Adjacent nodes u, v satisfy p_v / p_u = s / (n - s) where s is the size of
    v's branch seen from u, so a single downward pass fixes every ratio.
    """
    n = tree.n
    sub = view.subtree
    parent = view.parent
    logp = [0.0] * n
    for v in view.order[1:]:
        logp[v] = logp[parent[v]] + math.log(sub[v]) - math.log(n - sub[v])
    return np.array(logp)


def _upward_log_counts(tree, view, lf):
    """Leaves-first pass for the away-from-root branch ordering counts.

    Returns (up, childsum): up[v] is the log count of orderings of v's
    subtree that begin at v; for the root this is the log count of whole-tree
    histories seeded there.  childsum[u] is the sum over children c of
    up[c] - log(subtree[c]!), reused by the downward pass.
    """
    n = tree.n
    sub = view.subtree
    parent = view.parent
    up = [0.0] * n
    childsum = [0.0] * n
    for v in reversed(view.order):
        up[v] = lf[sub[v] - 1] + childsum[v]
        u = parent[v]
        if u >= 0:
            childsum[u] += up[v] - lf[sub[v]]
    return up, childsum


def seed_probabilities(tree, root=0):
    """Exact seed distribution in O(n); the propagation root is arbitrary."""
    n = tree.n
    if n == 1:
        return SeedDistribution(np.ones(1), np.zeros(1), 0.0)
    view = root_at(tree, root)
    rel = _propagate_seed_ratios(tree, view)
    lognorm = float(logsumexp(rel))
    log_p = rel - lognorm
    lf = log_factorials(n)
    up, _ = _upward_log_counts(tree, view, lf)
    # log Z = log h_root - log p_root, and log p_root = -lognorm by construction
    log_z = up[root] + lognorm
    return SeedDistribution(np.exp(log_p), log_p, float(log_z))


def total_log_histories(tree):
    """log of the number of orderings of the nodes consistent with the tree."""
    return seed_probabilities(tree).log_z


class EdgeLogCounts:
    """Branch ordering log counts for both orientations of every edge.

    Also carries the per-node log counts of whole-tree histories seeded at
    each node and the directed-edge index used to address the flat arrays.
    """

    def __init__(self, tree, index, log_h, log_h_seed, log_z):
        self.tree = tree
        self.index = index
        self._log_h = log_h
        self.log_h_seed = log_h_seed
        self.log_z = log_z

    def log_h(self, u, v):
        """log count of orderings of v's branch (edge (u, v) cut) starting at v."""
        return self._log_h[self.index.edge_id(u, v)]

    def as_dict(self):
        idx = self.index
        return {
            (idx.sources[e], idx.targets[e]): self._log_h[e]
            for e in range(len(self._log_h))
        }


def edge_log_counts(tree):
    """Both orientations for all n-1 edges in O(n) total (two sweeps).

    The away-from-root orientation comes from a leaves-first pass; the
    reverse orientation reuses per-node sums on the way back down, excluding
    one term by exact subtraction of logs (no log-sum-exp needed because the
    product over neighbours is a sum of log factors).
    """
    n = tree.n
    if n < 2:
        raise ValueError("edge counts need at least one edge")
    view = root_at(tree, 0)
    lf = log_factorials(n)
    index = DirectedEdgeIndex(tree, view)
    up, childsum = _upward_log_counts(tree, view, lf)
    parent, sub = view.parent, view.subtree

    # nodesum[u]: sum over all neighbours k of (log h_{u->k} - log n_{u->k}!),
    # completed in root-outward order because the toward-root term of u is
    # known once u's own reverse count has been computed.
    toward = [0.0] * n  # toward[v] = log count for the branch (v -> parent(v)) reversed
    nodesum = [0.0] * n
    nodesum[0] = childsum[0]
    for v in view.order[1:]:
        u = parent[v]
        sv = sub[v]
        toward[v] = lf[n - sv - 1] + nodesum[u] - (up[v] - lf[sv])
        nodesum[v] = childsum[v] + (toward[v] - lf[n - sv])

    log_h = [0.0] * len(index.rev)
    for e in range(len(log_h)):
        u, v = index.sources[e], index.targets[e]
        log_h[e] = up[v] if parent[v] == u else toward[u]

    log_h_seed = lf[n - 1] + np.array(nodesum)
    log_z = float(logsumexp(log_h_seed))
    return EdgeLogCounts(tree, index, log_h, log_h_seed, log_z)

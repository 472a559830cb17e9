"""Exact arrival-time posteriors p_i(t) for every node of a tree.

The computation has two stages.  First, for each directed edge (u -> v) and
each time t, a forward recursion counts the orderings of v's branch in which
v appears among the first t arrivals (a cumulative count, nondecreasing and
saturating at the branch's total).  Second, those cumulative counts combine
with the reverse-branch counts and a binomial interleaving factor to give the
number of histories in which u arrives at exactly t; normalizing each time
column yields the posterior.  All sums of products run in log space.

Cost is O(q n^2) time for excess degree q and O(n^2) memory: each directed
edge stores its cumulative vector only over the feasible range t <= branch
size, which is where every consumer of the value has a nonzero interleaving
factor.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .counts import edge_log_counts
from .logmath import NEG_INF, log_factorials, logaddexp


@dataclass
class ArrivalPosterior:
    """Row-and-column-stochastic matrix P[i, t] = p_i(t), seed at t = 0."""

    probabilities: np.ndarray
    log_z: float

    @property
    def n(self):
        return self.probabilities.shape[0]


def h_exclude(counts, i, k, j):
    """Log ordering count of j's residual branch with edges to i and k removed.

    i and k must be distinct neighbours of j; the residual branch is what
    remains attached to j after cutting both edges, and the count is over
    orderings of it that start at j.  Uses the closed form in terms of
    already-computed single-cut counts.
    """
    if i == k:
        raise ValueError("i and k must be distinct")
    idx = counts.index
    n = counts.tree.n
    lf = log_factorials(n)
    n_ji = idx.branch[idx.edge_id(j, i)]
    n_kj = idx.branch[idx.edge_id(k, j)]
    return (
        counts.log_h(k, j)
        + lf[n_ji]
        + lf[n_kj - 1 - n_ji]
        - counts.log_h(j, i)
        - lf[n_kj - 1]
    )


def _cumulative_branch_counts(tree, counts, lf):
    """Forward recursion for the per-edge cumulative ordering counts.

    Returns a list over directed-edge ids of float arrays g with g[t] (for
    t = 1..branch) the log count of branch orderings in which the branch root
    appears among the first t arrivals.  g[1] is the count of orderings that
    start at the root; g saturates at the branch's total ordering count.

    The step from t to t+1 adds, for the edge (i -> j), a sum over j's other
    neighbours k of  g_{j->k}(t) * h_{i,k->j} * C(n_ij - t - 1, n_jk - t).
    Expanding the closed form of h_{i,k->j} shows the k- and i-dependent
    factors separate, so the sum over k is an exclusive sum of per-edge
    terms; prefix/suffix accumulation gives all exclusive sums for a node in
    linear time, with no log-domain subtraction anywhere.
    """
    n = tree.n
    idx = counts.index
    branch = idx.branch
    rev = idx.rev
    ecount = len(branch)
    logh = [float(x) for x in counts._log_h]

    # a-side constant of edge d = (j -> k):  log h_{k->j} - log (n_{k->j} - 1)!
    # b-side constant of edge e = (i -> j):  log n_{j->i}! - log h_{j->i}
    c_a = [logh[rev[d]] - lf[n - branch[d] - 1] for d in range(ecount)]
    c_b = [lf[n - branch[e]] - logh[rev[e]] for e in range(ecount)]

    g = [None] * ecount
    for e in range(ecount):
        vec = array("d", [NEG_INF]) * (branch[e] + 1)
        vec[1] = logh[e]
        g[e] = vec
    if n == 2:
        return g

    # out-edges of each node, ascending branch size: the edges contributing
    # to the sum at time t are a suffix (branch >= t) and the in-edges still
    # needing updates correspond to a prefix (branch <= n - t - 1)
    outs = []
    for u in range(n):
        es = sorted(idx.out_ids(u), key=lambda d: branch[d])
        outs.append(es)
    ptr_lo = [0] * n
    ptr_hi = [len(o) for o in outs]
    live = list(range(n))
    ladd = logaddexp

    for t in range(1, n - 1):
        limit = n - t - 1
        still = []
        for j in live:
            oj = outs[j]
            hi = ptr_hi[j]
            while hi and branch[oj[hi - 1]] > limit:
                hi -= 1
            ptr_hi[j] = hi
            if hi == 0:
                continue
            still.append(j)
            dj = len(oj)
            lo = ptr_lo[j]
            while lo < dj and branch[oj[lo]] < t:
                lo += 1
            ptr_lo[j] = lo
            m = dj - lo
            avals = [g[d][t] + c_a[d] - lf[branch[d] - t] for d in oj[lo:]]
            pre = [NEG_INF] * (m + 1)
            suf = [NEG_INF] * (m + 1)
            for k in range(m):
                pre[k + 1] = ladd(pre[k], avals[k])
            for k in range(m - 1, -1, -1):
                suf[k] = ladd(suf[k + 1], avals[k])
            for k in range(hi):
                d = oj[k]  # reverse edge (j -> i); the edge advanced is e = (i -> j)
                e = rev[d]
                ki = k - lo
                if ki < 0:
                    excl = suf[0]
                else:
                    excl = ladd(pre[ki], suf[ki + 1])
                delta = c_b[e] + lf[n - branch[d] - t - 1] + excl
                ge = g[e]
                ge[t + 1] = ladd(ge[t], delta)
        live = still
    return g


def arrival_posterior(tree):
    """Full posterior over arrival times for every node.

    Time runs 0..n-1 with the seed at t = 0.  Each time column is normalized
    to sum to one; row sums then equal one up to accumulated rounding, which
    the tests assert rather than enforce.
    """
    n = tree.n
    if n == 1:
        return ArrivalPosterior(np.ones((1, 1)), 0.0)
    counts = edge_log_counts(tree)
    lf = log_factorials(n)
    g = _cumulative_branch_counts(tree, counts, lf)

    idx = counts.index
    branch = idx.branch
    rev = idx.rev
    logh = counts._log_h
    lf_np = np.asarray(lf)

    log_p = np.full((n, n), NEG_INF)
    log_p[:, 0] = counts.log_h_seed
    for i in range(n):
        es = list(idx.out_ids(i))
        width = max(branch[e] for e in es)
        block = np.full((len(es), width), NEG_INF)
        for r, e in enumerate(es):
            ne = branch[e]
            gv = np.frombuffer(g[e], dtype=np.float64)[1:]
            block[r, :ne] = gv + (logh[rev[e]] - lf[n - 1 - ne]) - lf_np[ne - 1 :: -1]
        over_edges = logsumexp(block, axis=0)
        tvals = np.arange(1, width + 1)
        log_p[i, 1 : width + 1] = over_edges + lf_np[n - 1 - tvals]
    col_norm = logsumexp(log_p, axis=0)
    probs = np.exp(log_p - col_norm)
    return ArrivalPosterior(probs, float(col_norm[0]))


def posterior_mean_times(post):
    """Posterior mean arrival time per node."""
    n = post.n
    return post.probabilities @ np.arange(n)


def credible_intervals(post, masses=(0.5, 0.95)):
    """Central credible intervals on arrival time per node.

    Returns {mass: (lo, hi)} with integer time arrays; lo is the smallest t
    whose cumulative mass reaches (1-mass)/2 and hi the smallest reaching
    1-(1-mass)/2, so intervals at higher mass contain those at lower mass.
    """
    cdf = np.cumsum(post.probabilities, axis=1)
    out = {}
    for mass in masses:
        ql = (1.0 - mass) / 2.0
        qh = 1.0 - ql
        lo = (cdf >= ql - 1e-12).argmax(axis=1)
        hi = (cdf >= qh - 1e-12).argmax(axis=1)
        out[mass] = (lo, hi)
    return out

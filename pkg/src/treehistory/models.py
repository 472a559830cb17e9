"""Growth mechanisms: generators and exact per-history log-likelihoods.

Three mechanisms share one convention: the first node is free (no choice) and
the second node's attachment is forced, so those steps contribute likelihood
one under every model and cancel from all model comparisons.

* uniform attachment: the newcomer picks an extant node uniformly.
* kernel attachment: the newcomer picks an extant node with probability
  proportional to degree**gamma (gamma = 0 reduces to uniform).
* redirection: the newcomer picks an extant node uniformly and keeps it with
  probability r, otherwise attaches to that node's parent.  The seed has no
  parent; a redirect that lands on it stays on it, which keeps the per-step
  law normalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .seeding import as_generator
from .tree import History, Tree, is_consistent


@dataclass(frozen=True)
class UniformAttachment:
    def spec(self):
        return "uniform"


@dataclass(frozen=True)
class KernelAttachment:
    gamma: float

    def spec(self):
        return f"kernel:gamma={self.gamma:g}"


@dataclass(frozen=True)
class RedirectionAttachment:
    r: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.r <= 1.0:
            raise ValueError("redirection keep-probability r must be in (0, 1]")

    def spec(self):
        return f"redirection:r={self.r:g}"


@dataclass(frozen=True)
class KernelFamily:
    """Kernel model with unknown exponent; evidence marginalizes over a grid."""

    def spec(self):
        return "kernel"


def parse_model_spec(spec):
    """Parse CLI-style model strings: uniform | kernel[:gamma=x] | redirection[:r=x]."""
    name, _, rest = spec.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            key, _, val = item.partition("=")
            if not val:
                raise ValueError(f"bad model parameter {item!r} in {spec!r}")
            params[key] = float(val)
    if name == "uniform":
        if params:
            raise ValueError("uniform takes no parameters")
        return UniformAttachment()
    if name == "kernel":
        if not params:
            return KernelFamily()
        if set(params) != {"gamma"}:
            raise ValueError("kernel takes a single parameter gamma")
        return KernelAttachment(params["gamma"])
    if name == "redirection":
        if set(params) - {"r"}:
            raise ValueError("redirection takes a single parameter r")
        return RedirectionAttachment(params.get("r", 0.5))
    raise ValueError(f"unknown model {spec!r}")


class DegreePowerSum:
    """Running sum of degree**gamma over extant nodes, updated per attachment.

    Starts from the two-node state (two degree-one nodes).  attach(d) accounts
    for one attachment to a node of current degree d: that node's weight moves
    from d**gamma to (d+1)**gamma and the newcomer contributes 1.
    """

    __slots__ = ("gamma", "total")

    def __init__(self, gamma):
        self.gamma = gamma
        self.total = 2.0

    def _pow(self, d):
        if self.gamma == 0.0:
            return 1.0
        return math.exp(self.gamma * math.log(d))

    def attach(self, degree_before):
        self.total += self._pow(degree_before + 1) - self._pow(degree_before) + 1.0


def _pow_gamma(d, gamma):
    return 1.0 if gamma == 0.0 else math.exp(gamma * math.log(d))


def generate(model, n, rng=None):
    """Grow an n-node tree under the mechanism; returns (tree, true history).

    Nodes are indexed by arrival, so the returned history is the identity
    order with the generator's parent choices.
    """
    rng = as_generator(rng)
    if n < 1:
        raise ValueError("n must be at least 1")
    parents = [-1] * n
    adjacency = [[] for _ in range(n)]
    edge_order = []

    def link(child, target):
        parents[child] = target
        adjacency[target].append(child)
        adjacency[child].append(target)
        edge_order.append((target, child))

    if n >= 2:
        link(1, 0)

    if isinstance(model, UniformAttachment):
        for t in range(2, n):
            link(t, int(rng.integers(t)))
    elif isinstance(model, KernelAttachment):
        gamma = model.gamma
        if n >= 3:
            picker = _FloatPicker(n)
            degree = [0] * n
            degree[0] = degree[1] = 1
            picker.set(0, 1.0)
            picker.set(1, 1.0)
            for t in range(2, n):
                u = picker.draw_index(rng)
                link(t, u)
                du = degree[u]
                picker.set(u, _pow_gamma(du + 1, gamma))
                degree[u] = du + 1
                picker.set(t, 1.0)
                degree[t] = 1
    elif isinstance(model, RedirectionAttachment):
        for t in range(2, n):
            u = int(rng.integers(t))
            if rng.random() >= model.r and parents[u] >= 0:
                u = parents[u]
            link(t, u)
    else:
        raise TypeError(f"cannot generate from {model!r}")

    tree = Tree(adjacency, labels=None, edge_order=edge_order)
    history = History(list(range(n)), list(range(n)), parents)
    return tree, history


class _FloatPicker:
    """Fenwick tree over float weights; draw is proportional to weight."""

    __slots__ = ("_fen", "_weight", "_cap")

    def __init__(self, capacity):
        self._cap = capacity
        self._fen = [0.0] * (capacity + 1)
        self._weight = [0.0] * capacity

    def set(self, i, w):
        delta = w - self._weight[i]
        self._weight[i] = w
        i += 1
        fen = self._fen
        while i <= self._cap:
            fen[i] += delta
            i += i & (-i)

    @property
    def total(self):
        s = 0.0
        i = self._cap
        while i > 0:
            s += self._fen[i]
            i -= i & (-i)
        return s

    def draw_index(self, rng):
        r = rng.random() * self.total
        pos = 0
        bit = 1 << (self._cap.bit_length() - 1)
        fen = self._fen
        while bit:
            nxt = pos + bit
            if nxt <= self._cap and fen[nxt] <= r:
                pos = nxt
                r -= fen[nxt]
            bit >>= 1
        if pos >= self._cap:  # float rounding at the top of the range
            pos = self._cap - 1
        while self._weight[pos] <= 0.0 and pos > 0:
            pos -= 1
        return pos


def log_likelihood(tree, history, model):
    """log P(G, H | model) for a feasible history of the tree.

    The order is re-validated; an ordering that is not a feasible history of
    this tree raises InconsistentHistoryError.
    """
    if not isinstance(history, History):
        history = is_consistent(tree, history)
    else:
        history = is_consistent(tree, history.order)
    n = tree.n
    if n <= 2:
        return 0.0
    order, parent_of = history.order, history.parent_of
    if isinstance(model, UniformAttachment):
        return -math.lgamma(n)
    if isinstance(model, KernelAttachment):
        gamma = model.gamma
        degree = [0] * n
        degree[order[0]] = 1
        degree[order[1]] = 1
        tracker = DegreePowerSum(gamma)
        ll = 0.0
        for t in range(2, n):
            v = order[t]
            u = parent_of[v]
            du = degree[u]
            ll += gamma * math.log(du) - math.log(tracker.total)
            tracker.attach(du)
            degree[u] = du + 1
            degree[v] = 1
        return ll
    if isinstance(model, RedirectionAttachment):
        r = model.r
        seed = order[0]
        children = [0] * n
        ll = 0.0
        for t in range(1, n):
            u = parent_of[order[t]]
            effective = children[u] + (1 if u == seed else 0)
            ll += math.log(r + (1.0 - r) * effective) - math.log(t)
            children[u] += 1
        return ll
    raise TypeError(f"cannot score under {model!r}")


def _target_degrees(history):
    """Per-step degree of the attachment target just before the step.

    Step s (s = 0..n-2) attaches node order[s+1].  The target's degree before
    the step equals the number of earlier steps that attached to it, plus one
    for its own parent edge unless it is the seed.
    """
    order = history.order
    parent_of = history.parent_of
    n = len(order)
    targets = np.fromiter(
        (parent_of[order[t]] for t in range(1, n)), dtype=np.int64, count=n - 1
    )
    sort = np.argsort(targets, kind="stable")
    sorted_targets = targets[sort]
    k = n - 1
    newgrp = np.ones(k, dtype=bool)
    newgrp[1:] = sorted_targets[1:] != sorted_targets[:-1]
    starts = np.maximum.accumulate(np.where(newgrp, np.arange(k), 0))
    occ = np.empty(k, dtype=np.int64)
    occ[sort] = np.arange(k) - starts
    deg = occ + (targets != order[0])
    return targets, deg


def kernel_log_likelihood_grid(tree, history, gammas):
    """log P(G, H | gamma) for every gamma at once, O(n log n + |grid| n).

    Matches log_likelihood(..., KernelAttachment(g)) for each grid entry; the
    vectorized route exists because posterior grids evaluate hundreds of
    exponents against the same histories.
    """
    history = is_consistent(tree, history.order if isinstance(history, History) else history)
    gammas = np.asarray(gammas, dtype=float)
    n = tree.n
    if n <= 2:
        return np.zeros(gammas.shape)
    _, deg = _target_degrees(history)
    d = deg[1:].astype(float)  # steps after the forced one; all >= 1
    lnd = np.log(d)
    lnd1 = np.log(d + 1.0)
    a = np.exp(gammas[:, None] * lnd[None, :])
    b = np.exp(gammas[:, None] * lnd1[None, :])
    inc = b - a + 1.0
    totals = np.empty_like(inc)
    totals[:, 0] = 2.0
    if inc.shape[1] > 1:
        totals[:, 1:] = 2.0 + np.cumsum(inc[:, :-1], axis=1)
    return gammas * lnd.sum() - np.log(totals).sum(axis=1)

"""Brute-force ground truth for small trees.

Everything here is exact integer arithmetic over explicitly enumerated
histories.  It exists to check the log-space machinery and the samplers, so
it must stay independent of them: enumeration walks the feasibility frontier
directly and never calls the counting code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class EnumerationTooLargeError(Exception):
    pass


@dataclass
class ExactEnumeration:
    """All feasible histories of a tree, with exact integer tallies.

    seed_counts[i] is the number of histories starting at i; arrival_counts
    is the integer matrix c[i][t] (node i arrives at time t); total is the
    number of histories, which equals every column sum of arrival_counts.
    """

    histories: list
    seed_counts: list
    arrival_counts: list
    total: int


def enumerate_histories(tree, limit=10):
    """Depth-first enumeration over feasible extensions.

    The frontier at each step is the set of absent nodes adjacent to a
    present one; recursing over frontier choices visits each history exactly
    once.  Guarded to n <= limit because the count grows factorially.
    """
    n = tree.n
    if n > limit:
        raise EnumerationTooLargeError(f"n = {n} exceeds enumeration limit {limit}")
    adjacency = tree.adjacency
    histories = []
    present = [False] * n
    prefix = []

    def extend(frontier):
        if len(prefix) == n:
            histories.append(tuple(prefix))
            return
        for i, v in enumerate(frontier):
            present[v] = True
            prefix.append(v)
            nxt = frontier[:i] + frontier[i + 1 :]
            nxt += [w for w in adjacency[v] if not present[w]]
            extend(nxt)
            prefix.pop()
            present[v] = False

    for seed in range(n):
        present[seed] = True
        prefix.append(seed)
        extend([w for w in adjacency[seed]])
        prefix.pop()
        present[seed] = False

    seed_counts = [0] * n
    arrival_counts = [[0] * n for _ in range(n)]
    for h in histories:
        seed_counts[h[0]] += 1
        for t, v in enumerate(h):
            arrival_counts[v][t] += 1
    return ExactEnumeration(histories, seed_counts, arrival_counts, len(histories))


def enumerate_by_filter(tree):
    """Second, independent enumeration path: filter all n! permutations.

    Uses a local adjacency test rather than the library's validator so the
    two oracle routes share no code.  Only viable up to n = 7 or so.
    """
    from itertools import permutations

    n = tree.n
    if n > 8:
        raise EnumerationTooLargeError("permutation filter is limited to n <= 8")
    adjacency = [set(a) for a in tree.adjacency]
    good = []
    for perm in permutations(range(n)):
        seen = set([perm[0]])
        ok = True
        for v in perm[1:]:
            if not (adjacency[v] & seen):
                ok = False
                break
            seen.add(v)
        if ok:
            good.append(perm)
    return good


def exact_kernel_likelihood_sum(tree, gamma, limit=10):
    """Exact model evidence sum_H P(G, H | gamma) by full enumeration.

    Sums exp(log_likelihood) over every feasible history, so it validates the
    Monte Carlo estimator end to end (the per-history likelihood is shared;
    what is being checked is the sampling average).
    """
    from .models import KernelAttachment, log_likelihood
    from .tree import is_consistent

    enum = enumerate_histories(tree, limit=limit)
    model = KernelAttachment(gamma)
    total = 0.0
    for order in enum.histories:
        hist = is_consistent(tree, list(order))
        total += math.exp(log_likelihood(tree, hist, model))
    return total

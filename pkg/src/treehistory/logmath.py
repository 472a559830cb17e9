"""Log-domain arithmetic shared by the counting and sampling code.

Ordering counts overflow fixed-width integers beyond a few dozen nodes, so
every count in this package is carried as a natural logarithm.  Zero counts
are represented by -inf.
"""

import math

import numpy as np
from scipy.special import gammaln

NEG_INF = float("-inf")


def log_factorials(n):
    """Table of log(k!) for k = 0..n as a plain Python list.

    A list of native floats is deliberate: scalar lookups in the hot loops of
    the posterior recursion are several times faster than indexing a numpy
    array.
    """
    return [float(x) for x in gammaln(np.arange(1, n + 2))]


def logaddexp(a, b):
    """log(exp(a) + exp(b)) for scalars, tolerant of -inf on either side."""
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    d = a - b
    if d >= 0.0:
        return a + math.log1p(math.exp(-d))
    return b + math.log1p(math.exp(d))


def logsumexp_iter(values):
    """log sum exp of an iterable of scalars (max-shifted, -inf safe)."""
    vals = list(values)
    if not vals:
        return NEG_INF
    m = max(vals)
    if m == NEG_INF:
        return NEG_INF
    return m + math.log(sum(math.exp(v - m) for v in vals))

"""Random-number plumbing.

Every sampling entry point accepts either an integer seed, a SeedSequence, an
existing numpy Generator, or None.  Parallel work is partitioned by spawning
one child stream per task from a single root SeedSequence, so results are
identical no matter how tasks are scheduled or how many workers run them.
"""

import numpy as np


def as_generator(rng):
    """Coerce a seed-like argument into a numpy Generator (PCG64)."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def spawn_generators(seed, count):
    """Independent child generators for `count` parallel tasks.

    The split uses numpy's SeedSequence tree, so child i is a fixed function
    of (seed, i) and does not depend on execution order.
    """
    root = np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in root.spawn(count)]

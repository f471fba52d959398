"""Counter-based random streams.

Every piece of randomness in the package is drawn from a Philox generator
keyed by ``(seed, *key)``.  Streams with distinct keys are independent, and a
fixed key always reproduces the same draws, so task-level parallelism cannot
change any numeric result.
"""

import numpy as np


def stream(seed, *key):
    """Return a ``numpy.random.Generator`` for the sub-stream ``(seed, *key)``."""
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be non-negative")
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))

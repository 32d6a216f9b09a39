"""Hash-derived child streams so every trial's draws depend only on its key."""

import numpy as np


def as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def child_seed(master_seed, *key) -> np.random.SeedSequence:
    """Child stream for ``key`` under ``master_seed``; keys must be non-negative ints."""
    base = as_seed_sequence(master_seed)
    return np.random.SeedSequence(base.entropy, spawn_key=tuple(base.spawn_key) + tuple(int(k) for k in key))

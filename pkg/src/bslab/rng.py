"""Deterministic random streams.

Every stochastic routine in the package draws from a named substream that
is a pure function of (master seed, integer path).  Philox is counter
based, so streams can be split arbitrarily without correlation, and a
replica or a per-vertex clock can be resampled in isolation: the stream
for (seed, replica, vertex) never depends on which other streams were
consumed.
"""
from __future__ import annotations

import numpy as np

__all__ = ["substream"]


def substream(master_seed: int, *path: int) -> np.random.Generator:
    """Return the generator for substream `path` of `master_seed`.

    The same (master_seed, path) always yields an identical stream, so
    results are reproducible regardless of scheduling or thread count.
    """
    if master_seed is None:
        raise ValueError("a master seed is required")
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in path))
    return np.random.Generator(np.random.Philox(ss))

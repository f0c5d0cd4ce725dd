"""Deterministic RNG substreams.

Every stochastic routine in the package takes a ``numpy.random.Generator``.
Experiments derive one independent substream per (stage, replicate) pair from
a single master seed, so results are reproducible bit-for-bit regardless of
how replicates are scheduled across workers.
"""
from __future__ import annotations

import numpy as np


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Return the generator for the substream identified by ``key``.

    The same (master_seed, key) always yields the same stream, and distinct
    keys yield statistically independent streams.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)

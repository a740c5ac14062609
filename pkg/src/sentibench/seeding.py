"""Deterministic, splittable random streams.

Every random decision in sentibench (split shuffles, bootstrap draws, feature
subsets, weight init, epoch shuffles) draws from a Philox counter-based
generator keyed on ``(seed, *keys)``. The same key always yields the same
stream on every platform, and no stream depends on wall-clock state.
"""
from typing import Sequence

import numpy as np

MAX_SEED = 2**64 - 1

# Stream namespaces, so that e.g. tree 3 and epoch 3 never share a stream.
STREAM_SPLIT = 1
STREAM_FOREST = 2
STREAM_BILSTM_INIT = 3
STREAM_BILSTM_SHUFFLE = 4
STREAM_VALIDATION = 5
STREAM_SYNTHETIC = 6


def check_seed(seed: int) -> int:
    """Validate a 64-bit unsigned seed."""
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ValueError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be in [0, 2**64 - 1], got {seed}")
    return seed


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Return a generator for the stream identified by ``(seed, *keys)``."""
    entropy: Sequence[int] = [check_seed(seed), *(int(k) for k in keys)]
    if any(k < 0 for k in entropy):
        raise ValueError(f"stream keys must be non-negative, got {list(keys)}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))

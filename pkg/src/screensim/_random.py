"""Seed derivation helpers.

Every random stream in the package is a Philox counter-based generator keyed
by a tuple of non-negative integers through :class:`numpy.random.SeedSequence`.
The same key tuple always yields the same stream, regardless of which thread
or in which order simulations are executed.
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

SeedLike = Union[int, Sequence[int]]

# stream tags, mixed into keys so that independent streams never collide
CANDIDATE_STREAM = 0
STAGE_STREAM = 1
TRUTH_STREAM = 2
NOISE_STREAM = 3
BASELINE_STREAM = 4


def _entropy(seed: SeedLike) -> tuple[int, ...]:
    if isinstance(seed, (int, np.integer)):
        keys = (int(seed),)
    else:
        keys = tuple(int(s) for s in seed)
    if any(k < 0 for k in keys):
        raise ValueError(f"seed components must be non-negative, got {keys}")
    return keys


def make_rng(seed: SeedLike, *tags: int) -> np.random.Generator:
    """Philox generator keyed by ``seed`` followed by ``tags``."""
    ss = np.random.SeedSequence(_entropy(seed) + tuple(tags))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: SeedLike, *tags: int) -> int:
    """Deterministic 63-bit integer seed for a sub-experiment."""
    ss = np.random.SeedSequence(_entropy(seed) + tuple(tags))
    hi, lo = ss.generate_state(2, dtype=np.uint32)
    return (int(hi) << 31) | (int(lo) >> 1)

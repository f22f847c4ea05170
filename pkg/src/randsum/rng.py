"""Seedable, splittable random streams.

Stream ``k`` of master seed ``s`` is ``PCG64(SeedSequence(s, spawn_key=(k,)))``,
so any worker can rebuild its own stream from ``(s, k)`` alone.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, index: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def streams(seed: int, count: int) -> list[np.random.Generator]:
    return [stream(seed, k) for k in range(count)]


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, an int seed, or None (fresh entropy)."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return np.random.default_rng()
    return stream(int(rng), 0)

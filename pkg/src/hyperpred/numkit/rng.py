"""Named, reproducible random streams.

Every stream is a PCG64 generator seeded with
``SeedSequence(entropy=seed, spawn_key=(crc32(name),))``.  The same
``(seed, name)`` pair yields the same stream on every platform, and distinct
names give statistically independent streams.
"""
from __future__ import annotations

import zlib

import numpy as np


def stream(seed: int, name: str) -> np.random.Generator:
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(key,))))


def split(rng: np.random.Generator, n: int) -> list[np.random.Generator]:
    """Derive ``n`` independent child generators from ``rng``."""
    return [np.random.Generator(np.random.PCG64(s)) for s in rng.bit_generator.seed_seq.spawn(n)]

"""Helper module for deriving reproducible random streams."""

from __future__ import annotations

import numpy as np

from .const import SEED_WORDS


def seed_sequence(master: int, *path: int) -> np.random.SeedSequence:
    """
    Build the SeedSequence for a stream below a master seed.

    Args:
        master: The master seed (non-negative integer)
        path: Stream identifiers, e.g. (STREAM_ONOFF, block_index)

    Returns:
        SeedSequence keyed by the master seed and the spawn path

    """
    return np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(p) for p in path))


def rng_for(master: int, *path: int) -> np.random.Generator:
    """Return a counter-based (Philox) generator for the given stream."""
    return np.random.Generator(np.random.Philox(seed_sequence(master, *path)))


def derive_seed(master: int, *path: int) -> int:
    """Derive a plain integer seed for a sub-task, stable across platforms."""
    words = seed_sequence(master, *path).generate_state(SEED_WORDS, dtype=np.uint32)
    return int(words[0]) << 32 | int(words[1])

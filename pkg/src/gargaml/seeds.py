"""Named, reproducible random sub-streams derived from one master seed."""

import zlib

import numpy as np


def substream(seed: int, name: str) -> int:
    """Stable 32-bit seed for the stream ``name`` under ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(zlib.crc32(name.encode()),))
    return int(ss.generate_state(1)[0])


def rng_for(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng(substream(seed, name))

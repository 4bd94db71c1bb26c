"""Seeded random streams.

All randomness goes through Philox, a counter-based generator whose output
is a pure function of (key, counter) and therefore identical on every
platform.  Independent streams are derived from a root seed plus an integer
path, e.g. ``stream(seed, LAYER, 3)`` for the third circuit layer.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1

# stream tags; keep values stable, they are part of the reproducibility contract
CIRCUIT = 1
SAMPLE = 2
NOISY = 3
MATCHING = 4
LOVASZ = 5
EXPERIMENT = 6


def _word(x) -> int:
    if isinstance(x, str):
        return int.from_bytes(hashlib.sha256(x.encode()).digest()[:8], "little")
    return int(x) & MASK64


def stream(seed: int, *path) -> np.random.Generator:
    """Return an independent Philox generator for ``(seed, *path)``."""
    ss = np.random.SeedSequence(entropy=_word(seed), spawn_key=tuple(_word(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))

"""Counter-based random streams.

Monte Carlo code derives one stream per work unit (path chunk, vertex, trial)
from (seed, unit ids). Streams never depend on execution order or worker
count, so aggregated results are bit-stable for a given seed.
"""

from __future__ import annotations

import os

import numpy as np

ENV_SEED = "PACKLAB_SEED"
_DEFAULT_SEED = 20080

_MASK64 = (1 << 64) - 1


def default_seed() -> int:
    """Seed from the environment, or the package default."""
    raw = os.environ.get(ENV_SEED)
    if raw is None:
        return _DEFAULT_SEED
    try:
        return int(raw) & _MASK64
    except ValueError:
        return _DEFAULT_SEED


def _mix(*parts: int) -> int:
    # splitmix64 over the id tuple; cheap and collision-resistant enough
    # for stream keying.
    h = 0x9E3779B97F4A7C15
    for p in parts:
        h = (h ^ (p & _MASK64)) * 0xBF58476D1CE4E5B9 & _MASK64
        h = (h ^ (h >> 27)) * 0x94D049BB133111EB & _MASK64
        h ^= h >> 31
    return h


def stream(seed: int, *unit: int) -> np.random.Generator:
    """Independent Philox stream keyed by seed and unit ids."""
    key = np.array([seed & _MASK64, _mix(seed, *unit)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))

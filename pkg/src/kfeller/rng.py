"""Counter-based uniforms: every draw is a pure function of (seed, stream, counter).

Stream ``i`` is SplitMix64 started from ``mix(seed_key + i)``, so draw ``c``
of stream ``i`` is ``mix(mix(seed_key + i) + (c + 1) * GOLDEN)``.  Paths can be
simulated in any batch layout or order and still see identical numbers.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def mix64(z):
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def seed_key(seed: int) -> np.uint64:
    return mix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) ^ np.uint64(0x5851F42D4C957F2D))[()]


def counter_uniform(seed: int, stream, counter) -> np.ndarray:
    """Uniform doubles in the open interval (0, 1)."""
    stream = np.asarray(stream, dtype=np.uint64)
    counter = np.asarray(counter, dtype=np.uint64)
    with np.errstate(over="ignore"):
        state = mix64(stream + seed_key(seed))
        bits = mix64(state + (counter + np.uint64(1)) * GOLDEN)
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


class CounterStream:
    """Sequential view of one stream, for single-path simulation."""

    def __init__(self, seed: int, stream: int, start: int = 0):
        self.seed = seed
        self.stream = stream
        self.counter = start

    def uniform(self) -> float:
        u = counter_uniform(self.seed, self.stream, self.counter)
        self.counter += 1
        return float(u)

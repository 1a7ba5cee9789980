"""Deterministic random streams.

Each ``Rng`` is an independent counter-based (Philox) stream keyed by
(seed, stream_id): the same pair reproduces the same sequence on any host,
and distinct stream_ids give statistically independent streams. Workers
never share a stream; they derive their own from the sample index.

Stream ids are composed as ``purpose_base + index`` so different uses of
the same seed can never collide.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# stream_id bases; indices are added below these
STREAM_INIT = 0
STREAM_SHUFFLE = 1 << 48
STREAM_VIEW = 2 << 48
STREAM_MASK = 3 << 48
STREAM_DROPOUT = 4 << 48
STREAM_SYNTH = 5 << 48


class Rng:
    """Counter-based random stream for one (seed, stream_id) pair."""

    algorithm = "philox4x64"

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        key = np.array([self.seed & _MASK64, self.stream_id & _MASK64], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None) -> np.ndarray | float:
        return self._gen.uniform(low, high, size=size)

    def normal(self, mean: float = 0.0, std: float = 1.0, size=None) -> np.ndarray | float:
        return self._gen.normal(mean, std, size=size)

    def integers(self, low: int, high: int, size=None):
        """Integers in [low, high)."""
        return self._gen.integers(low, high, size=size)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def choice_without_replacement(self, n: int, k: int) -> np.ndarray:
        """k distinct values from range(n), unsorted."""
        return self._gen.choice(n, size=k, replace=False)

    def bernoulli(self, p: float) -> bool:
        return bool(self._gen.uniform() < p)

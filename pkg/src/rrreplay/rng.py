"""Seeded random streams shared by every sampler.

All randomness goes through :class:`Rng`, a thin wrapper over numpy's PCG64
bit generator.  Streams are derived with :class:`numpy.random.SeedSequence`,
so a simulation seed can hand independent child streams to the shuffler and
to the prefix sampler without either perturbing the other.
"""

from __future__ import annotations

import numpy as np

SHUFFLE_STREAM = 0
SAMPLE_STREAM = 1


class Rng:
    """Explicitly seeded, splittable random number generator."""

    def __init__(self, seed: int | np.random.SeedSequence = 0):
        if isinstance(seed, np.random.SeedSequence):
            self._seq = seed
            self.seed = int(seed.entropy) if isinstance(seed.entropy, int) else None
        else:
            if seed < 0:
                raise ValueError(f"seed must be non-negative, got {seed}")
            self.seed = int(seed)
            self._seq = np.random.SeedSequence(self.seed)
        self.generator = np.random.Generator(np.random.PCG64(self._seq))

    def spawn(self, n: int) -> list[Rng]:
        return [Rng(child) for child in self._seq.spawn(n)]

    def integers(self, high: int, size: int | None = None):
        """Uniform integers in ``[0, high)``."""
        return self.generator.integers(0, high, size=size)

    def random(self, size: int | None = None):
        """Uniform floats in ``[0, 1)``."""
        return self.generator.random(size)

    def permutation(self, n: int) -> list[int]:
        # Generator.permutation is a Fisher-Yates shuffle of arange(n)
        return self.generator.permutation(n).tolist()

    def choice(self, n: int, k: int) -> list[int]:
        """``k`` distinct values from ``[0, n)``, uniform over subsets, random order."""
        return self.generator.choice(n, size=k, replace=False, shuffle=True).tolist()


def seed_streams(seed: int) -> tuple[Rng, Rng]:
    """Return the (shuffle, sample) stream pair for one simulation seed."""
    shuffle, sample = Rng(seed).spawn(2)
    return shuffle, sample

"""Uniform replay samplers: with replacement, within-minibatch without
replacement, and random reshuffling over circular-buffer slot indices (RR-C).
"""

from __future__ import annotations

from .buffer import RingBuffer
from .rng import Rng


def _check_nonempty(buffer: RingBuffer, batch: int) -> None:
    if len(buffer) == 0:
        raise ValueError("cannot sample from an empty buffer")
    if batch < 1:
        raise ValueError(f"batch must be >= 1, got {batch}")


def sample_wr(buffer: RingBuffer, batch: int, rng: Rng) -> list[int]:
    _check_nonempty(buffer, batch)
    return rng.integers(len(buffer), size=batch).tolist()


def sample_wor(buffer: RingBuffer, batch: int, rng: Rng) -> list[int]:
    _check_nonempty(buffer, batch)
    if batch > len(buffer):
        raise ValueError(f"batch {batch} exceeds buffer length {len(buffer)}")
    return rng.choice(len(buffer), batch)


class EpochShuffler:
    """Consumable permutation of ``range(capacity)``.

    A fresh shuffler starts exhausted, so the first sample call draws the
    first permutation.  Passing ``permutation`` pins the current epoch.
    """

    def __init__(self, capacity: int, permutation: list[int] | None = None):
        self.capacity = capacity
        if permutation is None:
            self.permutation = list(range(capacity))
            self.cursor = capacity
        else:
            if sorted(permutation) != list(range(capacity)):
                raise ValueError("permutation must be a permutation of range(capacity)")
            self.permutation = list(permutation)
            self.cursor = 0
        self.epochs = 0

    def remaining(self) -> int:
        return self.capacity - self.cursor

    def next_index(self, rng: Rng) -> int:
        if self.cursor == self.capacity:
            self.permutation = rng.permutation(self.capacity)
            self.cursor = 0
            self.epochs += 1
        i = self.permutation[self.cursor]
        self.cursor += 1
        return i


def sample_rrc(buffer: RingBuffer, batch: int, shuffler: EpochShuffler, rng: Rng) -> list[int]:
    """Draw ``batch`` occupied slots by consuming the epoch permutation.

    Unoccupied indices are skipped but still consumed.  A minibatch may
    straddle an epoch boundary, in which case a slot can repeat.
    """
    _check_nonempty(buffer, batch)
    if shuffler.capacity != buffer.capacity:
        raise ValueError("shuffler capacity does not match buffer capacity")
    n = len(buffer)
    out = []
    while len(out) < batch:
        i = shuffler.next_index(rng)
        if i < n:
            out.append(i)
    return out


class UniformSampler:
    prioritized = False
    name = ""

    def on_insert(self, slot: int, priority: float, evicted: bool) -> None:
        pass

    def set_priority(self, slot: int, priority: float) -> None:
        pass


class WRSampler(UniformSampler):
    name = "wr"

    def __init__(self, capacity: int, rng: Rng):
        self.rng = rng

    def sample(self, buffer: RingBuffer, batch: int) -> list[int]:
        return sample_wr(buffer, batch, self.rng)


class WORSampler(UniformSampler):
    name = "wor"

    def __init__(self, capacity: int, rng: Rng):
        self.rng = rng

    def sample(self, buffer: RingBuffer, batch: int) -> list[int]:
        return sample_wor(buffer, batch, self.rng)


class RRCSampler(UniformSampler):
    name = "rrc"

    def __init__(self, capacity: int, rng: Rng):
        self.rng = rng
        self.shuffler = EpochShuffler(capacity)

    def sample(self, buffer: RingBuffer, batch: int) -> list[int]:
        return sample_rrc(buffer, batch, self.shuffler, self.rng)

"""Random reshuffling by masking (RR-M) for prioritized replay.

Each slot carries an actual and an expected sample count.  Before every
minibatch, slots whose actual count exceeds their expected count are masked
(priority scaled by 1e-8) and the minibatch is drawn without replacement
from the masked priorities.  Expected counts always grow by the unmasked
sampling probabilities, so a masked slot is released once its expectation
catches up.
"""

from __future__ import annotations

import numpy as np

from .buffer import RingBuffer
from .rng import Rng
from .sumtree import MASK_FACTOR, MaskedPriorityStore

MAX_PASSES = 100


class SamplingStalled(RuntimeError):
    """The without-replacement loop failed to fill a minibatch."""


class CountLedger:
    def __init__(self, capacity: int):
        self.capacity = capacity
        self.actual = np.zeros(capacity, dtype=np.int64)
        self.expected = np.zeros(capacity, dtype=np.float64)

    def deviation(self, slot: int, buffer: RingBuffer | None = None) -> float:
        if buffer is not None and not buffer.is_occupied(slot):
            raise ValueError(f"slot {slot} is not occupied")
        return float(self.actual[slot] - self.expected[slot])

    def deviations(self) -> np.ndarray:
        return self.actual - self.expected

    def imbalance(self) -> float:
        return float(self.actual.sum() - self.expected.sum())


def deviation(ledger: CountLedger, slot: int, buffer: RingBuffer | None = None) -> float:
    return ledger.deviation(slot, buffer)


def on_evict(ledger: CountLedger, store: MaskedPriorityStore | None, evicted_slot: int) -> None:
    """Zero the evicted slot, then rescale the remaining expected counts so
    that their sum equals the sum of actual counts again.
    """
    ledger.actual[evicted_slot] = 0
    ledger.expected[evicted_slot] = 0.0
    total_expected = ledger.expected.sum()
    if total_expected > 0:
        ledger.expected *= ledger.actual.sum() / total_expected


def draw_distinct(store: MaskedPriorityStore, batch: int, rng: Rng) -> list[int]:
    """Batched prefix queries on the masked tree, deduplicated, with drawn
    slots excluded before the shortfall is redrawn.
    """
    tree = store.masked
    drawn: list[int] = []
    seen: set[int] = set()
    passes = 0
    try:
        while len(drawn) < batch:
            if passes == MAX_PASSES:
                raise SamplingStalled(
                    f"filled {len(drawn)} of {batch} slots after {MAX_PASSES} passes"
                )
            passes += 1
            total = tree.total()
            if total <= 0:
                raise SamplingStalled("masked priorities sum to zero")
            need = batch - len(drawn)
            if need == 1:
                picks = [tree.find(rng.random() * total)]
            else:
                picks = tree.find_many((rng.random(need) * total).tolist())
            fresh = []
            for i in picks:
                if i not in seen:
                    seen.add(i)
                    fresh.append(i)
            drawn.extend(fresh)
            if len(drawn) < batch:
                store.exclude(fresh)
    finally:
        if passes > 1 or len(drawn) < batch:
            store.restore(drawn)
    return drawn


def sample_rrm(
    buffer: RingBuffer,
    store: MaskedPriorityStore,
    ledger: CountLedger,
    batch: int,
    rng: Rng,
) -> list[int]:
    if batch < 1:
        raise ValueError(f"batch must be >= 1, got {batch}")
    base = store.base.leaves
    if np.count_nonzero(base[: len(buffer)] > 0) < batch:
        raise ValueError(f"fewer than {batch} occupied slots have positive priority")
    store.update_mask(ledger.actual > ledger.expected)
    drawn = draw_distinct(store, batch, rng)
    ledger.actual[drawn] += 1
    ledger.expected += base * (batch / store.base.total())
    return drawn


class RRMSampler:
    prioritized = True
    name = "rrm"

    def __init__(self, capacity: int, rng: Rng, mask_factor: float = MASK_FACTOR):
        self.rng = rng
        self.store = MaskedPriorityStore(capacity, mask_factor)
        self.ledger = CountLedger(capacity)

    def on_insert(self, slot: int, priority: float, evicted: bool) -> None:
        if evicted:
            on_evict(self.ledger, self.store, slot)
        self.store.set_priority(slot, priority)

    def set_priority(self, slot: int, priority: float) -> None:
        self.store.set_priority(slot, priority)

    def set_priorities(self, items) -> None:
        self.store.set_priorities(items)

    def priority(self, slot: int) -> float:
        return self.store.base.get(slot)

    def sample(self, buffer: RingBuffer, batch: int) -> list[int]:
        return sample_rrm(buffer, self.store, self.ledger, batch, self.rng)

"""Sum-tree priority storage and the prefix-sum samplers built on it."""

from __future__ import annotations

import numpy as np

from .buffer import RingBuffer
from .rng import Rng

MASK_FACTOR = 1e-8


class SumTree:
    """Complete binary tree over a power-of-two leaf array.

    Nodes are stored heap-style from index 1: node ``i`` has children
    ``2i`` and ``2i + 1`` and leaf ``slot`` lives at ``leaf_count + slot``.
    Internal nodes are always recomputed as the sum of their children
    rather than adjusted by deltas, so they never drift.

    The tree itself is a plain list (scalar access dominates); the real
    leaves are mirrored in a numpy array for vectorized reads.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"capacity must be positive, got {capacity}")
        self.capacity = int(capacity)
        self.leaf_count = 1 << (self.capacity - 1).bit_length()
        self.depth = self.leaf_count.bit_length() - 1
        self.nodes = [0.0] * (2 * self.leaf_count)
        self._leaves = np.zeros(self.capacity)
        self.touches = 0

    @property
    def leaves(self) -> np.ndarray:
        """Read-only view of the ``capacity`` real leaves."""
        view = self._leaves.view()
        view.flags.writeable = False
        return view

    def total(self) -> float:
        return self.nodes[1]

    def get(self, slot: int) -> float:
        return self.nodes[self.leaf_count + slot]

    def set(self, slot: int, p: float) -> None:
        if not 0 <= slot < self.capacity:
            raise IndexError(f"slot {slot} out of range [0, {self.capacity})")
        if not p >= 0:
            raise ValueError(f"priority must be >= 0, got {p}")
        self._write(slot, float(p))

    def _write(self, slot: int, p: float) -> None:
        # unchecked: callers guarantee 0 <= slot < capacity and p >= 0
        self._leaves[slot] = p
        nodes = self.nodes
        i = self.leaf_count + slot
        nodes[i] = p
        i >>= 1
        while i:
            j = i << 1
            nodes[i] = nodes[j] + nodes[j + 1]
            i >>= 1
        self.touches += self.depth + 1

    def _write_many(self, items) -> None:
        """Unchecked multi-leaf write; each ancestor is recomputed once."""
        nodes = self.nodes
        leaves = self._leaves
        n = self.leaf_count
        level = set()
        for slot, p in items:
            leaves[slot] = p
            nodes[n + slot] = p
            level.add((n + slot) >> 1)
        touched = len(level)
        while level:
            for i in level:
                j = i << 1
                nodes[i] = nodes[j] + nodes[j + 1]
            level = {i >> 1 for i in level if i > 1}
            touched += len(level)
        self.touches += touched

    def set_many(self, slots, values) -> None:
        """Bulk update followed by one O(n) rebuild."""
        slots = np.asarray(slots, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if slots.size == 0:
            return
        if slots.min() < 0 or slots.max() >= self.capacity:
            raise IndexError("slot out of range")
        if not np.all(values >= 0):
            raise ValueError("priorities must be >= 0")
        self._leaves[slots] = values
        self.rebuild()

    def rebuild(self) -> None:
        """Recompute every internal node bottom-up from the leaves."""
        n = self.leaf_count
        arr = np.zeros(2 * n)
        arr[n:n + self.capacity] = self._leaves
        lo = n
        while lo > 1:
            hi = lo
            lo >>= 1
            arr[lo:hi] = arr[2 * lo:2 * hi:2] + arr[2 * lo + 1:2 * hi:2]
        self.nodes = arr.tolist()

    def find(self, u: float) -> int:
        """Leaf whose cumulative-sum interval contains ``u``.

        Ties go right, and a branch with zero mass is never entered, so a
        zero-priority leaf is unreachable for any ``0 <= u``.
        """
        nodes = self.nodes
        n = self.leaf_count
        i = 1
        while i < n:
            i <<= 1
            left = nodes[i]
            if u >= left and nodes[i + 1] > 0:
                u -= left
                i += 1
        return i - n

    def find_many(self, us) -> list[int]:
        find = self.find
        return [find(u) for u in us]

    def check_consistency(self, rtol: float = 1e-9) -> bool:
        arr = np.asarray(self.nodes)
        n = self.leaf_count
        if not np.array_equal(arr[n:n + self.capacity], self._leaves):
            return False
        if np.any(arr[n + self.capacity:] != 0):
            return False
        internal = np.arange(1, n)
        sums = arr[2 * internal] + arr[2 * internal + 1]
        return bool(np.all(np.abs(arr[internal] - sums) <= rtol * np.abs(sums)))


def sample_prefix(tree: SumTree, u: float) -> int:
    total = tree.total()
    if total <= 0:
        raise ValueError("cannot sample from a tree with zero total priority")
    if not 0 <= u < total:
        raise ValueError(f"query {u} outside [0, {total})")
    return tree.find(u)


def sample_stratified(tree: SumTree, batch: int, rng: Rng) -> list[int]:
    """One prefix query drawn uniformly inside each of ``batch`` equal-width strata."""
    total = tree.total()
    if total <= 0:
        raise ValueError("cannot sample from a tree with zero total priority")
    if batch < 1:
        raise ValueError(f"batch must be >= 1, got {batch}")
    width = total / batch
    us = (np.arange(batch) + rng.random(batch)) * width
    np.minimum(us, np.nextafter(total, 0.0), out=us)
    return tree.find_many(us.tolist())


def probabilities(tree: SumTree) -> np.ndarray:
    total = tree.total()
    if total <= 0:
        raise ValueError("probabilities undefined for zero total priority")
    return tree.leaves / total


class MaskedPriorityStore:
    """Base priorities plus a second tree where oversampled slots are scaled
    by ``mask_factor``.  Only slots whose mask bit flips are rewritten.
    """

    def __init__(self, capacity: int, mask_factor: float = MASK_FACTOR):
        self.capacity = capacity
        self.mask_factor = mask_factor
        self.base = SumTree(capacity)
        self.masked = SumTree(capacity)
        self.mask = np.zeros(capacity, dtype=bool)

    @property
    def touches(self) -> int:
        return self.base.touches + self.masked.touches

    def effective(self, slot: int) -> float:
        p = self.base.get(slot)
        return p * self.mask_factor if self.mask[slot] else p

    def set_priority(self, slot: int, p: float) -> None:
        if not 0 <= slot < self.capacity:
            raise IndexError(f"slot {slot} out of range [0, {self.capacity})")
        if not p >= 0:
            raise ValueError(f"priority must be >= 0, got {p}")
        p = float(p)
        q = p * self.mask_factor if self.mask[slot] else p
        base, masked = self.base, self.masked
        base._leaves[slot] = p
        masked._leaves[slot] = q
        # both trees share the same root-to-leaf path
        b, m = base.nodes, masked.nodes
        i = base.leaf_count + slot
        b[i] = p
        m[i] = q
        i >>= 1
        while i:
            j = i << 1
            b[i] = b[j] + b[j + 1]
            m[i] = m[j] + m[j + 1]
            i >>= 1
        base.touches += base.depth + 1
        masked.touches += masked.depth + 1

    def update_mask(self, oversampled) -> None:
        oversampled = np.asarray(oversampled, dtype=bool)
        if oversampled.shape != (self.capacity,):
            raise ValueError(f"mask must have length {self.capacity}")
        changed = np.flatnonzero(oversampled != self.mask)
        if changed.size == 0:
            return
        self.mask[changed] = oversampled[changed]
        base = self.base.nodes
        offset = self.base.leaf_count
        factor = self.mask_factor
        self.masked._write_many(
            (i, base[offset + i] * factor if on else base[offset + i])
            for i, on in zip(changed.tolist(), oversampled[changed].tolist())
        )

    def set_priorities(self, items) -> None:
        """Write several ``(slot, priority)`` pairs at once."""
        items = [(int(i), float(p)) for i, p in items]
        for i, p in items:
            if not 0 <= i < self.capacity:
                raise IndexError(f"slot {i} out of range [0, {self.capacity})")
            if not p >= 0:
                raise ValueError(f"priority must be >= 0, got {p}")
        mask, factor = self.mask, self.mask_factor
        self.base._write_many(items)
        self.masked._write_many((i, p * factor if mask[i] else p) for i, p in items)

    def exclude(self, slots) -> None:
        """Temporarily remove slots from the masked tree."""
        self.masked._write_many((i, 0.0) for i in slots)

    def restore(self, slots) -> None:
        self.masked._write_many((i, self.effective(i)) for i in slots)

    def probabilities(self) -> np.ndarray:
        return probabilities(self.base)

    def rebuild(self) -> None:
        self.base.rebuild()
        self.masked.rebuild()


class PrioritySampler:
    """Shared priority bookkeeping for the tree-backed samplers."""

    prioritized = True
    name = ""

    def __init__(self, capacity: int, rng: Rng):
        self.rng = rng
        self.tree = SumTree(capacity)

    def on_insert(self, slot: int, priority: float, evicted: bool) -> None:
        self.tree.set(slot, priority)

    def set_priority(self, slot: int, priority: float) -> None:
        self.tree.set(slot, priority)

    def set_priorities(self, items) -> None:
        for i, p in items:
            if not p >= 0:
                raise ValueError(f"priority must be >= 0, got {p}")
        self.tree._write_many((int(i), float(p)) for i, p in items)

    def priority(self, slot: int) -> float:
        return self.tree.get(slot)


class PERSampler(PrioritySampler):
    """Independent prefix draws, i.e. prioritized sampling with replacement."""

    name = "per_wr"

    def sample(self, buffer: RingBuffer, batch: int) -> list[int]:
        total = self.tree.total()
        if total <= 0:
            raise ValueError("cannot sample from a tree with zero total priority")
        return self.tree.find_many((self.rng.random(batch) * total).tolist())


class StratifiedSampler(PrioritySampler):
    name = "stratified"

    def sample(self, buffer: RingBuffer, batch: int) -> list[int]:
        return sample_stratified(self.tree, batch, self.rng)

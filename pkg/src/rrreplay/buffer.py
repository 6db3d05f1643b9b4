"""Fixed-capacity circular replay buffer."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any


@dataclass(slots=True)
class Transition:
    id: int
    payload: Any = None
    priority: float = 1.0


class RingBuffer:
    """FIFO store where transition ``t`` always lives in slot ``t % capacity``.

    Slots are filled in order ``0, 1, ...`` until the buffer is full, so while
    it is filling the occupied slots are exactly ``range(len(buffer))``.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"capacity must be positive, got {capacity}")
        self.capacity = int(capacity)
        self.slots: list[Transition | None] = [None] * self.capacity
        self.write_cursor = 0
        self.next_id = 0
        self._len = 0

    def __len__(self) -> int:
        return self._len

    @property
    def full(self) -> bool:
        return self._len == self.capacity

    def insert(self, payload: Any = None, priority: float = 1.0) -> Transition | None:
        """Store a new transition and return the one it evicted, if any."""
        if not priority >= 0:
            raise ValueError(f"priority must be >= 0, got {priority}")
        slot = self.write_cursor
        evicted = self.slots[slot]
        self.slots[slot] = Transition(self.next_id, payload, float(priority))
        self.next_id += 1
        self.write_cursor = (slot + 1) % self.capacity
        if evicted is None:
            self._len += 1
        return evicted

    def get(self, slot: int) -> Transition | None:
        if not 0 <= slot < self.capacity:
            raise IndexError(f"slot {slot} out of range [0, {self.capacity})")
        return self.slots[slot]

    def __getitem__(self, slot: int) -> Transition | None:
        return self.get(slot)

    def is_occupied(self, slot: int) -> bool:
        return slot < self._len

    def ids(self) -> list[int]:
        return sorted(tr.id for tr in self.slots if tr is not None)

    def last_slot(self) -> int:
        """Slot written by the most recent insertion."""
        if self.next_id == 0:
            raise ValueError("buffer is empty")
        return (self.write_cursor - 1) % self.capacity

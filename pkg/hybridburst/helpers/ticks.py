"""Helper module for turning continuous-time intervals into integer-tick counts."""

from __future__ import annotations

import numpy as np

from .const import TICK_FLUSH_SIZE


def tick_bounds(start: np.ndarray, end: np.ndarray, n_ticks: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Return the half-open tick ranges [lo, hi) covered by the intervals [start, end).

    Tick k is covered iff start <= k < end, so lo = ceil(start) and
    hi = ceil(end), both clipped to [0, n_ticks]. Empty ranges have lo >= hi.
    """
    lo = np.clip(np.ceil(np.asarray(start, dtype=float)), 0, n_ticks).astype(np.int64)
    hi = np.clip(np.ceil(np.asarray(end, dtype=float)), 0, n_ticks).astype(np.int64)
    return lo, hi


class TickAccumulator:
    """Difference-array counter of how many intervals cover each tick."""

    def __init__(self, n_ticks: int, flush_size: int = TICK_FLUSH_SIZE) -> None:
        """Initialize an all-zero counter over ticks 0..n_ticks-1."""
        self.n_ticks = int(n_ticks)
        self._flush_size = flush_size
        self._diff = np.zeros(self.n_ticks + 1, dtype=np.int64)
        self._lo: list[np.ndarray] = []
        self._hi: list[np.ndarray] = []
        self._pending = 0

    def add(self, start: np.ndarray, end: np.ndarray) -> None:
        """Count every interval [start, end) at the ticks it covers."""
        lo, hi = tick_bounds(start, end, self.n_ticks)
        keep = lo < hi
        if not keep.any():
            return
        self._lo.append(lo[keep])
        self._hi.append(hi[keep])
        self._pending += int(keep.sum())
        if self._pending >= self._flush_size:
            self._flush()

    def merge(self, other: TickAccumulator) -> None:
        """Add another accumulator over the same tick range."""
        if other.n_ticks != self.n_ticks:
            msg = f"Cannot merge counters over {other.n_ticks} and {self.n_ticks} ticks"
            raise ValueError(msg)
        other._flush()
        self._flush()
        self._diff += other._diff

    def counts(self) -> np.ndarray:
        """Return the per-tick cover counts as int64."""
        self._flush()
        return np.cumsum(self._diff[:-1])

    def _flush(self) -> None:
        if not self._lo:
            return
        size = self.n_ticks + 1
        self._diff += np.bincount(np.concatenate(self._lo), minlength=size)
        self._diff -= np.bincount(np.concatenate(self._hi), minlength=size)
        self._lo.clear()
        self._hi.clear()
        self._pending = 0

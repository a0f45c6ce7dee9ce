"""Helper modules for hybridburst."""

from .export import (
    read_csv,
    write_bytes_atomic,
    write_csv,
    write_json_atomic,
    write_text_atomic,
)
from .seeding import derive_seed, rng_for, seed_sequence
from .ticks import TickAccumulator, tick_bounds
from .workers import worker_count

__all__ = [
    "TickAccumulator",
    "derive_seed",
    "read_csv",
    "rng_for",
    "seed_sequence",
    "tick_bounds",
    "worker_count",
    "write_bytes_atomic",
    "write_csv",
    "write_json_atomic",
    "write_text_atomic",
]

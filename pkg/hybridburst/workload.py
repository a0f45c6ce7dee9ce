"""Hybrid workload trace: alive-and-on count, alive count and the randomly centered series."""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any, Final

import numpy as np

from .const import (
    DEFAULT_MAX_LIVE_SESSIONS,
    DEFAULT_SEED,
    LOGGER,
    SESSION_BLOCK_SIZE,
    STREAM_ONOFF,
    TRACE_MAGIC,
    TRACE_VERSION,
)
from .exceptions import InvalidParameterError, TraceFormatError
from .helpers import TickAccumulator, read_csv, rng_for, worker_count, write_bytes_atomic, write_csv
from .onoff import OnOffParams, iter_on_intervals
from .sessions import GenerationMode, SessionParams, SessionSet, busy_servers, generate_sessions

if TYPE_CHECKING:
    import os

# Binary layout: little-endian header, then n_ticks records of (A, B, C)
TRACE_HEADER: Final = struct.Struct("<IIQ")
TRACE_RECORD: Final = np.dtype([("a", "<i8"), ("b", "<i8"), ("c", "<f8")])


@dataclass(frozen=True, eq=False)
class Trace:
    """Per-tick series A(k) <= B(k) and C(k) = mu_W B(k) - A(k)."""

    a: np.ndarray
    b: np.ndarray
    mu_w: float
    meta: dict[str, Any] = field(default_factory=dict)
    c: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        """Derive the centered series."""
        a = np.asarray(self.a, dtype=np.int64)
        b = np.asarray(self.b, dtype=np.int64)
        if a.shape != b.shape or a.ndim != 1:
            msg = f"A and B must be 1-D series of equal length, got {a.shape} and {b.shape}"
            raise InvalidParameterError(msg)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", self.mu_w * b - a)

    @property
    def n_ticks(self) -> int:
        """Length of the series."""
        return int(self.a.size)

    def to_csv(self, path: str | os.PathLike[str]) -> Path:
        """Write columns tick,A,B,C."""
        return write_csv(
            path,
            {"tick": np.arange(self.n_ticks), "A": self.a, "B": self.b, "C": self.c},
        )

    @classmethod
    def from_csv(cls, path: str | os.PathLike[str], mu_w: float) -> Trace:
        """Read a trace written by to_csv; C is recomputed from mu_w."""
        columns = read_csv(path)
        if not {"A", "B"} <= set(columns):
            msg = f"{path} is missing the A and B columns"
            raise TraceFormatError(msg)
        return cls(a=columns["A"].astype(np.int64), b=columns["B"].astype(np.int64), mu_w=mu_w)

    def to_bytes(self) -> bytes:
        """Encode as the little-endian binary trace format."""
        records = np.empty(self.n_ticks, dtype=TRACE_RECORD)
        records["a"] = self.a
        records["b"] = self.b
        records["c"] = self.c
        return TRACE_HEADER.pack(TRACE_MAGIC, TRACE_VERSION, self.n_ticks) + records.tobytes()

    def to_binary(self, path: str | os.PathLike[str]) -> Path:
        """Atomically write the binary trace format."""
        return write_bytes_atomic(path, self.to_bytes())

    @classmethod
    def from_bytes(cls, payload: bytes, mu_w: float | None = None) -> Trace:
        """
        Decode the binary trace format.

        Args:
            payload: Encoded trace
            mu_w: Centering weight; recovered from the stored C column when omitted

        Raises:
            TraceFormatError: On a bad magic, version or length

        """
        if len(payload) < TRACE_HEADER.size:
            msg = "Trace is shorter than its header"
            raise TraceFormatError(msg)
        magic, version, n_ticks = TRACE_HEADER.unpack_from(payload)
        if magic != TRACE_MAGIC:
            msg = f"Bad trace magic 0x{magic:08x}"
            raise TraceFormatError(msg)
        if version != TRACE_VERSION:
            msg = f"Unsupported trace version {version}"
            raise TraceFormatError(msg)
        body = payload[TRACE_HEADER.size :]
        if len(body) != n_ticks * TRACE_RECORD.itemsize:
            msg = f"Trace body holds {len(body)} bytes, expected {n_ticks * TRACE_RECORD.itemsize}"
            raise TraceFormatError(msg)
        records = np.frombuffer(body, dtype=TRACE_RECORD)
        if mu_w is None:
            mu_w = _recover_mu_w(records)
        trace = cls(a=records["a"].copy(), b=records["b"].copy(), mu_w=mu_w)
        object.__setattr__(trace, "c", records["c"].astype(float))
        return trace

    @classmethod
    def from_binary(cls, path: str | os.PathLike[str], mu_w: float | None = None) -> Trace:
        """Read a binary trace file."""
        try:
            payload = Path(path).read_bytes()
        except OSError as err:
            msg = f"Cannot read trace {path} - {err}"
            raise TraceFormatError(msg) from err
        return cls.from_bytes(payload, mu_w)


def _recover_mu_w(records: np.ndarray) -> float:
    """Solve C = mu_W B - A for mu_W on the tick with the most live sessions."""
    if records.size == 0 or records["b"].max() == 0:
        return 0.0
    k = int(np.argmax(records["b"]))
    return float((records["c"][k] + records["a"][k]) / records["b"][k])


def _on_counts_for_blocks(
    oo: OnOffParams,
    begin: np.ndarray,
    end: np.ndarray,
    blocks: list[int],
    onoff_seed: int,
    n_ticks: int,
) -> TickAccumulator:
    """Accumulate alive-and-on ticks for a set of session blocks."""
    counter = TickAccumulator(n_ticks)
    for block in blocks:
        rows = slice(block * SESSION_BLOCK_SIZE, (block + 1) * SESSION_BLOCK_SIZE)
        rng = rng_for(onoff_seed, STREAM_ONOFF, block)
        for _, start, stop in iter_on_intervals(oo, begin[rows], end[rows], rng):
            counter.add(start, stop)
    return counter


def active_sources(
    sessions: SessionSet,
    oo: OnOffParams,
    n_ticks: int,
    onoff_seed: int,
    workers: int | None = None,
) -> np.ndarray:
    """
    Count the sessions that are alive and on at every tick.

    Sessions are cut into blocks of SESSION_BLOCK_SIZE; block i draws its
    on-off paths from stream (onoff_seed, i), so the counts do not depend on
    the number of workers.
    """
    begin = np.maximum(sessions.start, 0.0)
    end = np.minimum(sessions.end, float(n_ticks))
    n_blocks = -(-len(sessions) // SESSION_BLOCK_SIZE)
    workers = min(worker_count(workers, LOGGER), max(n_blocks, 1))
    assignments = [list(range(i, n_blocks, workers)) for i in range(workers)]
    LOGGER.debug("Sampling %d sessions in %d blocks on %d threads", len(sessions), n_blocks, workers)
    if workers == 1:
        return _on_counts_for_blocks(oo, begin, end, assignments[0], onoff_seed, n_ticks).counts()
    total = TickAccumulator(n_ticks)
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="onoff") as pool:
        futures = [
            pool.submit(_on_counts_for_blocks, oo, begin, end, blocks, onoff_seed, n_ticks) for blocks in assignments
        ]
        for future in futures:
            total.merge(future.result())
    return total.counts()


def synthesize(
    sess: SessionParams,
    oo: OnOffParams,
    n_ticks: int,
    mode: GenerationMode = GenerationMode.EXACT,
    seed: int = DEFAULT_SEED,
    *,
    onoff_seed: int | None = None,
    discard: float | None = None,
    truncate: bool = False,
    workers: int | None = None,
    max_live: float = DEFAULT_MAX_LIVE_SESSIONS,
) -> Trace:
    """
    Synthesize the hybrid trace.

    Every session carries an independent stationary on-off path observed
    only while the session is alive.

    Args:
        sess: Session layer parameters
        oo: On-off parameters
        n_ticks: Trace length (>= 1)
        mode: Session initialization strategy
        seed: Master seed for the session layer
        onoff_seed: Master seed for the on-off layer (defaults to seed)
        discard: Warm-up length in warm-up mode
        truncate: Floor session durations to integers
        workers: Thread count for on-off sampling
        max_live: Budget on the expected number of live sessions

    Returns:
        Trace of length n_ticks

    Raises:
        InvalidParameterError: If n_ticks < 1
        SessionBudgetError: If the session population exceeds the budget

    """
    if n_ticks < 1:
        msg = f"A trace needs at least one tick, got {n_ticks}"
        raise InvalidParameterError(msg)
    onoff_seed = seed if onoff_seed is None else onoff_seed
    sessions = generate_sessions(sess, n_ticks, mode, seed, discard=discard, truncate=truncate, max_live=max_live)
    b = busy_servers(sessions, n_ticks)
    a = active_sources(sessions, oo, n_ticks, onoff_seed, workers)
    meta = {
        "seed": seed,
        "onoff_seed": onoff_seed,
        "mode": sessions.mode.value,
        "discard": sessions.discard,
        "truncate": truncate,
        "sessions": sess.as_dict(),
        "onoff": oo.as_dict(),
        "n_sessions": len(sessions),
    }
    return Trace(a=a, b=b, mu_w=oo.mu_w, meta=meta)


def cumulative(trace: Trace) -> np.ndarray:
    """Return Y(t) = C(0) + ... + C(t)."""
    return np.cumsum(trace.c)


def nonrandom_centered(trace: Trace, sess: SessionParams, oo: OnOffParams) -> np.ndarray:
    """Return A(k) - mu_W rate E[V], the series centered by its deterministic mean."""
    return trace.a - oo.mu_w * sess.expected_live


def aggregate(series: np.ndarray, m: int) -> np.ndarray:
    """Sum non-overlapping blocks of m samples, dropping an incomplete last block."""
    if m < 1:
        msg = f"Block size must be positive, got {m}"
        raise InvalidParameterError(msg)
    series = np.asarray(series)
    blocks = series.size // m
    return series[: blocks * m].reshape(blocks, m).sum(axis=1)

"""Poisson session arrivals with heavy-tailed lifetimes (the burst layer)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Final

import numpy as np

from .const import (
    DEFAULT_MAX_LIVE_SESSIONS,
    DEFAULT_SEED,
    DEFAULT_WARMUP_FACTOR,
    LOGGER,
    MODE_EXACT,
    MODE_WARMUP,
    STREAM_SESSIONS,
)
from .exceptions import InvalidParameterError, SessionBudgetError, TraceFormatError
from .heavytail import ParetoDist, pareto_from_mean
from .helpers import TickAccumulator, read_csv, rng_for, write_csv

if TYPE_CHECKING:
    import os
    from collections.abc import Iterator
    from pathlib import Path

# Arrivals drawn per vectorized chunk
ARRIVAL_CHUNK: Final = 1 << 20


class GenerationMode(str, Enum):
    """How the session population reaches stationarity at time 0."""

    EXACT = MODE_EXACT  # Poisson population of residual lifetimes at 0
    WARMUP = MODE_WARMUP  # arrivals from -discard, early sessions dropped


@dataclass(frozen=True)
class SessionParams:
    """Arrival rate (sessions per tick) and lifetime law."""

    rate: float
    lifetime: ParetoDist

    def __post_init__(self) -> None:
        """Validate the rate."""
        if not (self.rate > 0 and math.isfinite(self.rate)):
            msg = f"Arrival rate must be positive, got {self.rate}"
            raise InvalidParameterError(msg)

    @classmethod
    def from_means(cls, rate: float, alpha: float, mean: float) -> SessionParams:
        """Build the parameters from the rate and the lifetime (index, mean)."""
        return cls(rate=rate, lifetime=pareto_from_mean(mean, alpha))

    @property
    def expected_live(self) -> float:
        """Stationary mean number of live sessions, rate * E[V]."""
        return self.rate * self.lifetime.mean

    def as_dict(self) -> dict[str, float]:
        """Return the defining parameters."""
        return {"rate": self.rate, "alpha": self.lifetime.alpha, "mean": self.lifetime.mean}


@dataclass(frozen=True, eq=False)
class SessionSet:
    """Sessions overlapping [0, horizon), sorted by start time."""

    start: np.ndarray
    duration: np.ndarray
    horizon: float
    mode: GenerationMode = GenerationMode.EXACT
    discard: float = 0.0
    seed: int = DEFAULT_SEED
    truncated: bool = False
    end: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        """Cache session end times."""
        object.__setattr__(self, "end", self.start + self.duration)

    def __len__(self) -> int:
        """Return the number of sessions."""
        return int(self.start.size)

    def alive_at(self, t: float) -> int:
        """Return how many sessions satisfy start <= t < start + duration."""
        return int(np.count_nonzero((self.start <= t) & (t < self.end)))

    def to_csv(self, path: str | os.PathLike[str]) -> Path:
        """Write columns start,duration."""
        return write_csv(path, {"start": self.start, "duration": self.duration})

    @classmethod
    def from_csv(cls, path: str | os.PathLike[str], horizon: float, seed: int = DEFAULT_SEED) -> SessionSet:
        """Read sessions written by to_csv for replay, keeping those overlapping [0, horizon)."""
        columns = read_csv(path)
        if set(columns) != {"start", "duration"}:
            msg = f"{path} is not a session table (columns {sorted(columns)})"
            raise TraceFormatError(msg)
        start, duration = columns["start"], columns["duration"]
        if np.any(duration < 0):
            msg = f"{path} contains negative durations"
            raise TraceFormatError(msg)
        order = np.argsort(start, kind="stable")
        start, duration = start[order], duration[order]
        keep = (start < horizon) & (start + duration > 0)
        return cls(start=start[keep], duration=duration[keep], horizon=horizon, seed=seed)


def _arrivals(
    rng: np.random.Generator,
    params: SessionParams,
    begin: float,
    end: float,
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield chunks of (start, duration) for Poisson arrivals on (begin, end)."""
    clock = begin
    while clock < end:
        expected = (end - clock) * params.rate
        chunk = int(min(ARRIVAL_CHUNK, expected + 6 * math.sqrt(expected) + 16))
        starts = clock + np.cumsum(rng.exponential(1.0 / params.rate, chunk))
        durations = params.lifetime.sample(rng, chunk)
        inside = starts < end
        yield starts[inside], durations[inside]
        clock = float(starts[-1])


def generate_sessions(
    params: SessionParams,
    horizon: float,
    mode: GenerationMode = GenerationMode.EXACT,
    seed: int = DEFAULT_SEED,
    *,
    discard: float | None = None,
    truncate: bool = False,
    max_live: float = DEFAULT_MAX_LIVE_SESSIONS,
) -> SessionSet:
    """
    Generate the sessions overlapping [0, horizon).

    Exact mode places Poisson(rate * E[V]) sessions alive at 0 with
    equilibrium residual lifetimes, then adds arrivals on (0, horizon).
    Warm-up mode starts arrivals at -discard with full lifetimes and drops
    sessions that end before 0.

    Args:
        params: Session parameters
        horizon: End of the observation window (>= 0)
        mode: Stationary initialization strategy
        seed: Master seed
        discard: Warm-up length (defaults to 50 mean lifetimes)
        truncate: Floor durations to integers, dropping zero-length sessions
        max_live: Budget on the expected number of live sessions

    Returns:
        SessionSet sorted by start time

    Raises:
        SessionBudgetError: If rate * E[V] exceeds max_live
        InvalidParameterError: If horizon or discard is negative

    """
    if horizon < 0:
        msg = f"Horizon must be non-negative, got {horizon}"
        raise InvalidParameterError(msg)
    if params.expected_live > max_live:
        msg = f"Expected {params.expected_live:.4g} live sessions exceeds the budget of {max_live:.4g}"
        raise SessionBudgetError(msg)
    mode = GenerationMode(mode)
    rng = rng_for(seed, STREAM_SESSIONS)
    starts: list[np.ndarray] = []
    durations: list[np.ndarray] = []

    if mode is GenerationMode.EXACT:
        discard = 0.0
        initial = int(rng.poisson(params.expected_live))
        starts.append(np.zeros(initial))
        durations.append(np.asarray(params.lifetime.equilibrium_sample(rng, initial), dtype=float))
        begin = 0.0
    else:
        discard = DEFAULT_WARMUP_FACTOR * params.lifetime.mean if discard is None else float(discard)
        if discard < 0:
            msg = f"Warm-up discard must be non-negative, got {discard}"
            raise InvalidParameterError(msg)
        begin = -discard

    for chunk_start, chunk_duration in _arrivals(rng, params, begin, horizon):
        if truncate:
            chunk_duration = np.floor(chunk_duration)
        alive = chunk_start + chunk_duration > 0
        starts.append(chunk_start[alive])
        durations.append(chunk_duration[alive])

    start = np.concatenate(starts) if starts else np.empty(0)
    duration = np.concatenate(durations) if durations else np.empty(0)
    if truncate:
        duration = np.floor(duration)
        keep = duration > 0
        start, duration = start[keep], duration[keep]

    LOGGER.debug(
        "Generated %d sessions (%s mode, horizon %.0f, discard %.0f, seed %d)",
        start.size,
        mode.value,
        horizon,
        discard,
        seed,
    )
    return SessionSet(
        start=start,
        duration=duration,
        horizon=float(horizon),
        mode=mode,
        discard=discard,
        seed=seed,
        truncated=truncate,
    )


def busy_servers(sessions: SessionSet, n_ticks: int) -> np.ndarray:
    """
    Count the live sessions at every tick, B(k) = #{i : start_i <= k < end_i}.

    Raises:
        InvalidParameterError: If n_ticks exceeds the generated horizon

    """
    if n_ticks < 0 or n_ticks > sessions.horizon:
        msg = f"Cannot count {n_ticks} ticks over a horizon of {sessions.horizon}"
        raise InvalidParameterError(msg)
    counter = TickAccumulator(n_ticks)
    counter.add(sessions.start, sessions.end)
    return counter.counts()

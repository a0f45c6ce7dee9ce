"""Stationary alternating on-off process and its autocovariance."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np
from scipy import signal

from .const import (
    CYCLES_PER_ROUND,
    DEFAULT_GRID_DIVISOR,
    DEFAULT_TAIL_HORIZON,
    LOGGER,
    MIN_GRID_DIVISOR,
    STREAM_ENSEMBLE,
    STREAM_ONOFF,
)
from .exceptions import DomainError, GridTooCoarseError, InvalidParameterError, TailFitError, TraceFormatError
from .heavytail import ParetoDist, pareto_from_mean
from .helpers import read_csv, rng_for, write_csv

if TYPE_CHECKING:
    import os
    from collections.abc import Callable, Iterator
    from pathlib import Path

    from numpy.typing import ArrayLike

# Relative slack on the monotonicity check of the fitted tail
MONOTONE_TOLERANCE = 1e-6


class OnOffState(str, Enum):
    """State of a single on-off source."""

    ON = "on"
    OFF = "off"


@dataclass(frozen=True)
class OnOffParams:
    """On and off duration laws plus the stationary moments they imply."""

    on: ParetoDist
    off: ParetoDist
    mu_w: float = field(init=False)
    sigma_w_sq: float = field(init=False)
    alpha_min: float = field(init=False)
    mu_max: float = field(init=False)

    def __post_init__(self) -> None:
        """Cache the derived moments."""
        cycle = self.on.mean + self.off.mean
        mu_w = self.on.mean / cycle
        object.__setattr__(self, "mu_w", mu_w)
        object.__setattr__(self, "sigma_w_sq", mu_w * (1.0 - mu_w))
        object.__setattr__(self, "alpha_min", min(self.on.alpha, self.off.alpha))
        if self.on.alpha > self.off.alpha:
            mu_max = self.on.mean
        elif self.off.alpha > self.on.alpha:
            mu_max = self.off.mean
        else:
            mu_max = max(self.on.mean, self.off.mean)
        object.__setattr__(self, "mu_max", mu_max)

    @classmethod
    def from_means(cls, alpha_on: float, mean_on: float, alpha_off: float, mean_off: float) -> OnOffParams:
        """Build the parameters from (index, mean) pairs of both laws."""
        return cls(on=pareto_from_mean(mean_on, alpha_on), off=pareto_from_mean(mean_off, alpha_off))

    @property
    def equal_indices(self) -> bool:
        """True when both laws share the tail index."""
        return self.on.alpha == self.off.alpha

    @property
    def min_scale(self) -> float:
        """Smaller of the two Pareto scales."""
        return min(self.on.x_m, self.off.x_m)

    @property
    def sigma_lim_sq(self) -> float:
        """Limit variance scale 2 mu_max**2 / (mu_W**3 (a-1)(3-a)(2-a)) with a = alpha_min."""
        a = self.alpha_min
        if not 1 < a < 2:
            msg = f"alpha_min must lie in (1, 2), got {a}"
            raise DomainError(msg)
        return 2 * self.mu_max**2 / (self.mu_w**3 * (a - 1) * (3 - a) * (2 - a))

    def law(self, state: OnOffState) -> ParetoDist:
        """Return the duration law of a state."""
        return self.on if state is OnOffState.ON else self.off

    def as_dict(self) -> dict[str, float]:
        """Return the defining parameters."""
        return {
            "alpha_on": self.on.alpha,
            "mean_on": self.on.mean,
            "alpha_off": self.off.alpha,
            "mean_off": self.off.mean,
        }


class OnOffPath:
    """
    One stationary on-off sample path, advanced by successive tick queries.

    The path owns its random stream; it may move between threads but must
    not be shared.
    """

    def __init__(self, params: OnOffParams, rng: np.random.Generator) -> None:
        """Start the path in equilibrium at time 0."""
        self.params = params
        self.rng = rng
        self.current_state = OnOffState.ON if rng.random() < params.mu_w else OnOffState.OFF
        self._clock = 0
        self._segment_start = 0.0
        self._next_change = float(params.law(self.current_state).equilibrium_sample(rng))

    @property
    def clock(self) -> int:
        """Next tick the path will report."""
        return self._clock

    @property
    def residual(self) -> float:
        """Time from the current clock until the next transition."""
        return self._next_change - self._clock

    def sample_at_ticks(self, n_ticks: int) -> np.ndarray:
        """
        Point-sample the indicator at the next n_ticks integer times.

        Args:
            n_ticks: Number of ticks to report (>= 0)

        Returns:
            int8 array whose entry k is 1 iff the path is on at clock + k

        """
        if n_ticks < 0:
            msg = f"n_ticks must be non-negative, got {n_ticks}"
            raise InvalidParameterError(msg)
        begin = self._clock
        end = begin + n_ticks
        out = np.zeros(n_ticks, dtype=np.int8)
        while True:
            if self.current_state is OnOffState.ON:
                lo = max(math.ceil(self._segment_start), begin)
                hi = min(math.ceil(self._next_change), end)
                if lo < hi:
                    out[lo - begin : hi - begin] = 1
            if self._next_change > end:
                break
            self._advance()
        self._clock = end
        return out

    def _advance(self) -> None:
        self.current_state = OnOffState.OFF if self.current_state is OnOffState.ON else OnOffState.ON
        self._segment_start = self._next_change
        self._next_change += float(self.params.law(self.current_state).sample(self.rng))


def new_stationary_path(params: OnOffParams, seed: int) -> OnOffPath:
    """Return a path that is stationary from tick 0, driven by its own stream of the seed."""
    return OnOffPath(params, rng_for(seed, STREAM_ONOFF))


def iter_on_intervals(
    params: OnOffParams,
    begin: ArrayLike,
    end: ArrayLike,
    rng: np.random.Generator,
) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """
    Generate the on-periods of independent stationary paths on [begin_i, end_i).

    Each path starts in equilibrium at begin_i. Durations are drawn in
    rounds of CYCLES_PER_ROUND full cycles for every path still active, so
    the work is vectorized across paths.

    Args:
        params: On-off parameters
        begin: Window start per path
        end: Window end per path
        rng: Random stream consumed in a fixed order

    Yields:
        (row, start, stop) arrays: on-period [start, stop) of path `row`,
        clipped to its window

    """
    begin = np.asarray(begin, dtype=float)
    end = np.asarray(end, dtype=float)
    n_paths = begin.size
    if n_paths == 0:
        return
    started_on = rng.random(n_paths) < params.mu_w
    first = np.where(
        started_on,
        params.on.equilibrium_sample(rng, n_paths),
        params.off.equilibrium_sample(rng, n_paths),
    )
    clock = begin + first
    rows = np.flatnonzero(started_on & (begin < end))
    if rows.size:
        yield rows, begin[rows], np.minimum(clock[rows], end[rows])

    width = 2 * CYCLES_PER_ROUND
    parity = np.arange(width) % 2
    active = np.flatnonzero(clock < end)
    while active.size:
        count = active.size
        on_draws = params.on.sample(rng, (count, CYCLES_PER_ROUND))
        off_draws = params.off.sample(rng, (count, CYCLES_PER_ROUND))
        was_on = started_on[active][:, None]
        durations = np.empty((count, width))
        # paths that started on continue with an off period
        durations[:, 0::2] = np.where(was_on, off_draws, on_draws)
        durations[:, 1::2] = np.where(was_on, on_draws, off_draws)
        stops = clock[active][:, None] + np.cumsum(durations, axis=1)
        starts = np.concatenate([clock[active][:, None], stops[:, :-1]], axis=1)
        window_end = end[active][:, None]
        keep = (parity[None, :] == was_on) & (starts < window_end)
        row_grid = np.broadcast_to(active[:, None], keep.shape)
        yield row_grid[keep], starts[keep], np.minimum(stops, window_end)[keep]
        clock[active] = stops[:, -1]
        active = active[clock[active] < end[active]]


def sample_ensemble(params: OnOffParams, n_paths: int, ticks: ArrayLike, seed: int) -> np.ndarray:
    """
    Point-sample independent stationary paths at the given ticks.

    Args:
        params: On-off parameters
        n_paths: Number of independent paths
        ticks: Sorted, non-negative integer sampling times
        seed: Master seed

    Returns:
        int8 array of shape (n_paths, len(ticks))

    """
    ticks = np.asarray(ticks, dtype=np.int64)
    if ticks.size == 0 or n_paths == 0:
        return np.zeros((n_paths, ticks.size), dtype=np.int8)
    if np.any(np.diff(ticks) <= 0) or ticks[0] < 0:
        msg = "Ticks must be non-negative and strictly increasing"
        raise InvalidParameterError(msg)
    width = ticks.size + 1
    diff = np.zeros(n_paths * width, dtype=np.int64)
    begin = np.zeros(n_paths)
    end = np.full(n_paths, float(ticks[-1] + 1))
    for rows, start, stop in iter_on_intervals(params, begin, end, rng_for(seed, STREAM_ENSEMBLE)):
        lo = np.searchsorted(ticks, np.ceil(start), side="left")
        hi = np.searchsorted(ticks, np.ceil(stop), side="left")
        keep = lo < hi
        base = rows[keep] * width
        diff += np.bincount(base + lo[keep], minlength=diff.size)
        diff -= np.bincount(base + hi[keep], minlength=diff.size)
    return np.cumsum(diff.reshape(n_paths, width), axis=1)[:, :-1].astype(np.int8)


@dataclass(frozen=True, eq=False)
class AutocovTable:
    """Grid values of pi11(t) = P(W(t) = 1 | W(0) = 1) and r(t) = Cov[W(0), W(t)]."""

    dt: float
    pi11: np.ndarray
    values: np.ndarray

    @property
    def t(self) -> np.ndarray:
        """Grid times k * dt."""
        return np.arange(self.values.size) * self.dt

    @property
    def horizon(self) -> float:
        """Last grid time."""
        return (self.values.size - 1) * self.dt

    def r_at(self, t: ArrayLike) -> np.ndarray | float:
        """Linearly interpolate r at times within the grid."""
        ts = np.asarray(t, dtype=float)
        if np.any(ts < 0) or np.any(ts > self.horizon + 1e-9 * self.dt):
            msg = f"Lag outside the solved range [0, {self.horizon}]"
            raise InvalidParameterError(msg)
        out = np.interp(ts, self.t, self.values)
        return float(out) if np.ndim(t) == 0 else out

    def to_csv(self, path: str | os.PathLike[str]) -> Path:
        """Write columns t,pi11,r."""
        return write_csv(path, {"t": self.t, "pi11": self.pi11, "r": self.values})

    @classmethod
    def from_csv(cls, path: str | os.PathLike[str]) -> AutocovTable:
        """Read a table written by to_csv."""
        columns = read_csv(path)
        if set(columns) != {"t", "pi11", "r"} or columns["t"].size < 2:
            msg = f"{path} is not an autocovariance table"
            raise TraceFormatError(msg)
        dt = float(columns["t"][1] - columns["t"][0])
        return cls(dt=dt, pi11=columns["pi11"], values=columns["r"])


def _cell_masses(cdf: Callable[[np.ndarray], np.ndarray | float], t: np.ndarray, dt: float) -> np.ndarray:
    """Probability mass of each grid cell [t_k - dt/2, t_k + dt/2), cell 0 being [0, dt/2)."""
    upper = np.asarray(cdf(t + dt / 2), dtype=float)
    lower = np.asarray(cdf(np.maximum(t - dt / 2, 0.0)), dtype=float)
    return np.maximum(upper - lower, 0.0)


def solve_pi11(
    params: OnOffParams,
    dt: float | None = None,
    horizon: float = DEFAULT_TAIL_HORIZON,
) -> AutocovTable:
    """
    Solve for pi11 on a regular grid and fill r(t) = sigma_W**2 - mu_W (1 - pi11(t)).

    Conditioned on being on at time 0, the path stays on for an
    equilibrium residual and later restarts on-periods with density g,
    where g = q + p * g, p is the cycle law F_on * F_off and q the law of
    (residual on-time + off-time). Then

        pi11(t) = 1 - G_on(t) + (g * Fbar_on)(t).

    All laws are discretized to cell masses so that mass is conserved, and
    the on-survival kernel is averaged over each cell.

    Args:
        params: On-off parameters
        dt: Grid step (defaults to the smaller Pareto scale / 8)
        horizon: Last lag to solve for

    Returns:
        AutocovTable on the grid 0, dt, ..., K dt >= horizon

    Raises:
        GridTooCoarseError: If dt exceeds a quarter of the smaller Pareto scale
        InvalidParameterError: If dt <= 0 or horizon < dt

    """
    if dt is None:
        dt = params.min_scale / DEFAULT_GRID_DIVISOR
    if not dt > 0:
        msg = f"Grid step must be positive, got {dt}"
        raise InvalidParameterError(msg)
    if dt > params.min_scale / MIN_GRID_DIVISOR:
        msg = f"Grid step {dt} skips the support onset (limit {params.min_scale / MIN_GRID_DIVISOR})"
        raise GridTooCoarseError(msg)
    if horizon < dt:
        msg = f"Horizon {horizon} is shorter than the grid step {dt}"
        raise InvalidParameterError(msg)

    n_steps = math.ceil(horizon / dt - 1e-9)
    size = n_steps + 1
    t = np.arange(size) * dt
    LOGGER.debug("Solving renewal equation on %d grid points (dt=%.4g)", size, dt)

    on_mass = _cell_masses(params.on.cdf, t, dt)
    off_mass = _cell_masses(params.off.cdf, t, dt)
    residual_mass = _cell_masses(params.on.equilibrium_cdf, t, dt)
    cycle = np.maximum(signal.fftconvolve(on_mass, off_mass)[:size], 0.0)
    first = np.maximum(signal.fftconvolve(residual_mass, off_mass)[:size], 0.0)

    # g[k] = q[k] + sum_{j>=1} p[j] g[k-j]
    starts = np.zeros(size)
    cycle_rev = cycle[::-1].copy()
    for k in range(1, size):
        starts[k] = first[k] + np.dot(starts[:k], cycle_rev[size - 1 - k : size - 1])

    # Start mass of a cell is spread over [t_j - dt/2, t_j + dt/2), so the kernel at
    # lag m is Fbar_on averaged over that width; m = 0 keeps only the half before t_k.
    edges = np.asarray(params.on.integrated_tail(np.maximum(t - dt / 2, 0.0)), dtype=float)
    on_tail = (edges - np.asarray(params.on.integrated_tail(t + dt / 2), dtype=float)) / dt
    pi11 = 1.0 - np.asarray(params.on.equilibrium_cdf(t), dtype=float)
    pi11 += signal.fftconvolve(starts, on_tail)[:size]
    pi11 = np.clip(pi11, 0.0, 1.0)
    pi11[0] = 1.0
    values = params.sigma_w_sq - params.mu_w * (1.0 - pi11)
    return AutocovTable(dt=dt, pi11=pi11, values=values)


@dataclass(frozen=True)
class TailFit:
    """Power-law fit r(u) ~ c_r * u**(1 - alpha_min) over the largest decade of the grid."""

    exponent: float
    fitted_exponent: float
    c_r: float
    l_r: float
    sigma_lim_sq: float
    u_low: float
    u_high: float
    outside_scope: bool


def r_tail_asymptote(
    params: OnOffParams,
    table: AutocovTable | None = None,
    horizon: float = DEFAULT_TAIL_HORIZON,
) -> TailFit:
    """
    Fit the regularly varying tail of r.

    The amplitude is fitted with the exponent fixed at 1 - alpha_min; the
    free least-squares slope is reported alongside for comparison. Equal
    on and off indices give a flagged result.

    Raises:
        DomainError: If alpha_min is outside (1, 2)
        TailFitError: If r is non-positive or increasing over the fit window

    """
    if table is None:
        table = solve_pi11(params, horizon=horizon)
    sigma_lim_sq = params.sigma_lim_sq
    alpha = params.alpha_min
    if params.equal_indices:
        LOGGER.warning("Equal on/off tail indices (%.3g); the limit variance scale is flagged", alpha)

    u = table.t
    u_high = table.horizon
    window = (u >= u_high / 10) & (u > 0)
    u_fit = u[window]
    r_fit = table.values[window]
    if u_fit.size < 2:
        msg = "Autocovariance grid too short for a tail fit"
        raise TailFitError(msg)
    if np.any(r_fit <= 0):
        msg = f"Autocovariance is non-positive on [{u_fit[0]:.4g}, {u_high:.4g}]"
        raise TailFitError(msg)
    if np.any(np.diff(r_fit) > MONOTONE_TOLERANCE * params.sigma_w_sq):
        msg = f"Autocovariance is not monotone on [{u_fit[0]:.4g}, {u_high:.4g}]"
        raise TailFitError(msg)

    log_u = np.log(u_fit)
    log_r = np.log(r_fit)
    fitted_exponent = float(np.polyfit(log_u, log_r, 1)[0])
    c_r = float(np.exp(np.mean(log_r + (alpha - 1) * log_u)))
    l_r = c_r / (sigma_lim_sq / 2 * (3 - alpha) * (2 - alpha))
    LOGGER.debug("Tail fit: exponent %.4f (theory %.4f), c_r=%.6g", fitted_exponent, 1 - alpha, c_r)
    return TailFit(
        exponent=1 - alpha,
        fitted_exponent=fitted_exponent,
        c_r=c_r,
        l_r=l_r,
        sigma_lim_sq=sigma_lim_sq,
        u_low=float(u_fit[0]),
        u_high=u_high,
        outside_scope=params.equal_indices,
    )

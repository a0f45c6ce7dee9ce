"""Duration laws shared by the session and on-off layers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Protocol

import numpy as np
from scipy import special

from .exceptions import InvalidParameterError

if TYPE_CHECKING:
    from numpy.typing import ArrayLike


class LifetimeLaw(Protocol):
    """Interface the theory engine needs from a session lifetime law."""

    @property
    def mean(self) -> float:
        """Expected value."""

    def tail(self, x: ArrayLike) -> np.ndarray | float:
        """P(V > x)."""

    def integrated_tail(self, x: ArrayLike) -> np.ndarray | float:
        """Integral of the tail from x to infinity."""

    def integrated_tail_power_moment(self, x0: float, power: float) -> float:
        """Integral of z**power times the integrated tail over [x0, infinity)."""


def _as_float(value: np.ndarray, scalar: bool) -> np.ndarray | float:
    return float(value) if scalar else value


@dataclass(frozen=True)
class ParetoDist:
    """
    Pareto law with tail (x_m / x)**alpha above the scale x_m.

    The slowly varying factor of the tail is the constant x_m**alpha.
    """

    alpha: float
    x_m: float
    mean: float = field(init=False)

    def __post_init__(self) -> None:
        """Validate the parameters and cache the mean."""
        if not (self.alpha > 1 and math.isfinite(self.alpha)):
            msg = f"Pareto tail index must exceed 1 for a finite mean, got alpha={self.alpha}"
            raise InvalidParameterError(msg)
        if not (self.x_m > 0 and math.isfinite(self.x_m)):
            msg = f"Pareto scale must be positive, got x_m={self.x_m}"
            raise InvalidParameterError(msg)
        object.__setattr__(self, "mean", self.x_m * self.alpha / (self.alpha - 1))

    @property
    def slowly_varying_constant(self) -> float:
        """Asymptotic constant L with tail(x) = x**-alpha * L for x > x_m."""
        return self.x_m**self.alpha

    def tail(self, x: ArrayLike) -> np.ndarray | float:
        """Return P(X > x); 1 on [0, x_m]."""
        scalar = np.ndim(x) == 0
        xs = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(xs <= self.x_m, 1.0, (self.x_m / np.maximum(xs, self.x_m)) ** self.alpha)
        return _as_float(out, scalar)

    def cdf(self, x: ArrayLike) -> np.ndarray | float:
        """Return P(X <= x)."""
        scalar = np.ndim(x) == 0
        out = 1.0 - np.asarray(self.tail(x), dtype=float)
        return _as_float(out, scalar)

    def integrated_tail(self, x: ArrayLike) -> np.ndarray | float:
        """
        Return the integral of the tail over [x, infinity).

        Equal to mean - x below the scale and to
        x_m**alpha * x**(1 - alpha) / (alpha - 1) above it.
        """
        scalar = np.ndim(x) == 0
        xs = np.asarray(x, dtype=float)
        above = self.x_m**self.alpha * np.maximum(xs, self.x_m) ** (1 - self.alpha) / (self.alpha - 1)
        out = np.where(xs <= self.x_m, self.mean - xs, above)
        return _as_float(out, scalar)

    def integrated_tail_power_moment(self, x0: float, power: float) -> float:
        """Integral of z**power * integrated_tail(z) over [x0, inf); requires x0 >= x_m."""
        if x0 < self.x_m:
            msg = f"Power moment is only closed-form above the scale ({x0} < {self.x_m})"
            raise InvalidParameterError(msg)
        exponent = power + 1 - self.alpha
        if exponent >= -1:
            return math.inf
        coef = self.x_m**self.alpha / (self.alpha - 1)
        return coef * x0 ** (exponent + 1) / -(exponent + 1)

    def equilibrium_cdf(self, z: ArrayLike) -> np.ndarray | float:
        """CDF of the residual-life law with density tail(z) / mean."""
        scalar = np.ndim(z) == 0
        zs = np.maximum(np.asarray(z, dtype=float), 0.0)
        out = 1.0 - np.asarray(self.integrated_tail(zs), dtype=float) / self.mean
        return _as_float(out, scalar)

    def sample(self, rng: np.random.Generator, size: int | tuple[int, ...] | None = None) -> np.ndarray | float:
        """Draw by inversion, x_m * U**(-1/alpha) with U on (0, 1]."""
        u = 1.0 - rng.random(size)
        return self.x_m * u ** (-1.0 / self.alpha)

    def equilibrium_sample(
        self, rng: np.random.Generator, size: int | tuple[int, ...] | None = None
    ) -> np.ndarray | float:
        """Draw a stationary residual duration by inverting equilibrium_cdf, with U on (0, 1]."""
        u = 1.0 - rng.random(size)
        knee = (self.alpha - 1) / self.alpha
        upper = self.alpha * np.maximum(1.0 - u, np.finfo(float).epsneg)
        out = np.where(u <= knee, u * self.mean, self.x_m * upper ** (-1.0 / (self.alpha - 1)))
        return float(out) if size is None else out


def pareto_from_mean(mean: float, alpha: float) -> ParetoDist:
    """
    Build the Pareto law with the given mean and tail index.

    Args:
        mean: Expected duration (> 0)
        alpha: Tail index (> 1)

    Returns:
        ParetoDist with x_m = mean * (alpha - 1) / alpha

    Raises:
        InvalidParameterError: If mean <= 0 or alpha <= 1

    """
    if not (mean > 0 and math.isfinite(mean)):
        msg = f"Mean must be positive, got {mean}"
        raise InvalidParameterError(msg)
    if not alpha > 1:
        msg = f"Tail index must exceed 1, got {alpha}"
        raise InvalidParameterError(msg)
    return ParetoDist(alpha=alpha, x_m=mean * (alpha - 1) / alpha)


@dataclass(frozen=True)
class ExponentialDist:
    """Light-tailed lifetime law with the given mean."""

    mean: float

    def __post_init__(self) -> None:
        """Validate the mean."""
        if not (self.mean > 0 and math.isfinite(self.mean)):
            msg = f"Exponential mean must be positive, got {self.mean}"
            raise InvalidParameterError(msg)

    def tail(self, x: ArrayLike) -> np.ndarray | float:
        """Return exp(-x / mean)."""
        scalar = np.ndim(x) == 0
        xs = np.maximum(np.asarray(x, dtype=float), 0.0)
        return _as_float(np.exp(-xs / self.mean), scalar)

    def integrated_tail(self, x: ArrayLike) -> np.ndarray | float:
        """Return mean * exp(-x / mean)."""
        scalar = np.ndim(x) == 0
        xs = np.asarray(x, dtype=float)
        out = np.where(xs <= 0, self.mean - xs, self.mean * np.exp(-np.maximum(xs, 0.0) / self.mean))
        return _as_float(out, scalar)

    def integrated_tail_power_moment(self, x0: float, power: float) -> float:
        """Integral of z**power * mean * exp(-z / mean) over [x0, inf) via the upper incomplete gamma."""
        shape = power + 1
        if shape <= 0:
            msg = f"Power {power} gives a divergent moment at the origin"
            raise InvalidParameterError(msg)
        upper = special.gammaincc(shape, x0 / self.mean) * special.gamma(shape)
        return float(self.mean ** (power + 2) * upper)

    def sample(self, rng: np.random.Generator, size: int | tuple[int, ...] | None = None) -> np.ndarray | float:
        """Draw exponential lifetimes."""
        return rng.exponential(self.mean, size)

    def equilibrium_sample(
        self, rng: np.random.Generator, size: int | tuple[int, ...] | None = None
    ) -> np.ndarray | float:
        """Residual life of an exponential law is the same exponential law."""
        return rng.exponential(self.mean, size)

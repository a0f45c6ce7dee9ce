"""Wavelet logscale-diagram Hurst estimation and an exact fGn generator."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING, Any

import numpy as np
import pywt
from scipy import special

from .const import (
    CI_Z,
    DEFAULT_WAVELET_ORDER,
    DEGENERATE_ENERGY_RATIO,
    EIGENVALUE_TOLERANCE,
    LOGGER,
    MAX_WAVELET_ORDER,
    MIN_OCTAVE_COEFFS,
    MIN_REGRESSION_OCTAVES,
    MIN_WAVELET_ORDER,
    STREAM_FGN,
)
from .exceptions import (
    DegenerateDiagramError,
    EmbeddingError,
    InsufficientOctavesError,
    InvalidParameterError,
    InvalidWaveletOrderError,
    SeriesTooShortError,
)
from .helpers import rng_for, write_csv

if TYPE_CHECKING:
    import os
    from pathlib import Path

    from numpy.typing import ArrayLike

LN2 = math.log(2.0)


def _check_order(wavelet_order: int) -> str:
    if not MIN_WAVELET_ORDER <= wavelet_order <= MAX_WAVELET_ORDER:
        msg = f"Daubechies order must be in [{MIN_WAVELET_ORDER}, {MAX_WAVELET_ORDER}], got {wavelet_order}"
        raise InvalidWaveletOrderError(msg)
    return f"db{int(wavelet_order)}"


def deepest_octave(n_samples: int, wavelet_order: int = DEFAULT_WAVELET_ORDER) -> int:
    """Deepest octave keeping MIN_OCTAVE_COEFFS coefficients after trimming N at each end."""
    need = MIN_OCTAVE_COEFFS + 2 * wavelet_order
    j = 0
    while n_samples >> (j + 1) >= need:
        j += 1
    return j


def dwt_coefficients(
    series: ArrayLike,
    wavelet_order: int = DEFAULT_WAVELET_ORDER,
    level: int | None = None,
) -> list[np.ndarray]:
    """
    Return the periodized Daubechies-N pyramid [a_J, d_J, ..., d_1].

    Octave j is element -j of the list.
    """
    wavelet = _check_order(wavelet_order)
    data = np.asarray(series, dtype=float)
    if level is None:
        level = pywt.dwt_max_level(data.size, pywt.Wavelet(wavelet).dec_len)
    if level < 1:
        msg = f"A series of {data.size} samples is too short for one octave"
        raise SeriesTooShortError(msg)
    return pywt.wavedec(data, wavelet, mode="periodization", level=level)


def log2_bias(n_coeffs: int | np.ndarray) -> np.ndarray | float:
    """Small-sample bias of log2 of a mean of n squared Gaussians, psi(n/2)/ln2 - log2(n/2)."""
    half = np.asarray(n_coeffs, dtype=float) / 2
    return special.digamma(half) / LN2 - np.log2(half)


@dataclass(frozen=True)
class OctaveStat:
    """Detail-coefficient statistics of one octave."""

    j: int
    n_coeffs: int
    mu: float
    log2_mu: float
    weight: float


@dataclass(frozen=True)
class LogscaleDiagram:
    """Per-octave log2 detail variances of a series."""

    octaves: tuple[OctaveStat, ...]
    wavelet_order: int
    degenerate: bool = False

    @property
    def j(self) -> np.ndarray:
        """Octave indices."""
        return np.array([o.j for o in self.octaves], dtype=int)

    @property
    def log2_mu(self) -> np.ndarray:
        """Bias-corrected log2 variances."""
        return np.array([o.log2_mu for o in self.octaves])

    @property
    def weights(self) -> np.ndarray:
        """Regression weights."""
        return np.array([o.weight for o in self.octaves])

    def to_csv(self, path: str | os.PathLike[str]) -> Path:
        """Write columns octave,n_coeffs,log2_variance,weight."""
        return write_csv(
            path,
            {
                "octave": self.j,
                "n_coeffs": np.array([o.n_coeffs for o in self.octaves], dtype=int),
                "log2_variance": self.log2_mu,
                "weight": self.weights,
            },
        )


def dwt_logscale(
    series: ArrayLike,
    wavelet_order: int = DEFAULT_WAVELET_ORDER,
    max_octave: int | None = None,
) -> LogscaleDiagram:
    """
    Build the logscale diagram of a stationary noise.

    For each octave j the N coefficients at each end are dropped (periodic
    wraparound), mu_j is the mean squared detail coefficient and
    log2_mu_j = log2(mu_j) - g(n_j) with g the digamma bias. The weight
    ln(2)**2 n_j / 2 is the inverse asymptotic variance of log2_mu_j.

    Args:
        series: Increment series, e.g. C(k)
        wavelet_order: Daubechies vanishing moments N in [1, 10]
        max_octave: Deepest octave to compute (defaults to the deepest usable)

    Returns:
        LogscaleDiagram, flagged degenerate when the detail energy vanishes

    Raises:
        InvalidWaveletOrderError: If N is outside [1, 10]
        SeriesTooShortError: If no octave keeps enough coefficients

    """
    _check_order(wavelet_order)
    data = np.asarray(series, dtype=float)
    deepest = deepest_octave(data.size, wavelet_order)
    if deepest < 1:
        msg = f"A series of {data.size} samples is too short for Daubechies-{wavelet_order}"
        raise SeriesTooShortError(msg)
    level = deepest if max_octave is None else max(1, min(max_octave, deepest))
    coeffs = dwt_coefficients(data, wavelet_order, level)

    stats = []
    detail_energy = 0.0
    for j in range(1, level + 1):
        detail = coeffs[-j][wavelet_order:-wavelet_order]
        n_j = int(detail.size)
        mu = float(np.mean(detail**2))
        detail_energy += mu * n_j
        with np.errstate(divide="ignore"):
            log2_mu = float(np.log2(mu) - log2_bias(n_j))
        stats.append(OctaveStat(j=j, n_coeffs=n_j, mu=mu, log2_mu=log2_mu, weight=LN2**2 * n_j / 2))

    input_energy = float(np.sum(data**2))
    degenerate = detail_energy <= DEGENERATE_ENERGY_RATIO * input_energy or detail_energy == 0.0
    if degenerate:
        LOGGER.warning("Logscale diagram is degenerate (detail energy %.3g)", detail_energy)
    return LogscaleDiagram(octaves=tuple(stats), wavelet_order=wavelet_order, degenerate=degenerate)


@dataclass(frozen=True)
class HurstEstimate:
    """Slope-based Hurst estimate with an approximate 95% interval."""

    h: float
    ci_low: float
    ci_high: float
    slope: float
    slope_se: float
    j1: int
    j2: int
    wavelet_order: int

    def covers(self, h: float) -> bool:
        """True when h lies inside the interval."""
        return self.ci_low <= h <= self.ci_high

    def as_dict(self) -> dict[str, Any]:
        """Return the JSON form."""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> HurstEstimate:
        """Rebuild an estimate from its JSON form."""
        return cls(**data)


def estimate_hurst(diagram: LogscaleDiagram, j1: int, j2: int) -> HurstEstimate:
    """
    Fit the logscale diagram over [j1, j2] by weighted least squares.

    H = (slope + 1) / 2. The slope standard error is scaled by the weighted
    residual variance, so an exact line has a zero-width interval.

    Raises:
        DegenerateDiagramError: If the diagram carries no detail energy
        InsufficientOctavesError: If fewer than three octaves are available in range

    """
    if diagram.degenerate:
        msg = "Cannot regress a degenerate logscale diagram"
        raise DegenerateDiagramError(msg)
    if j1 >= j2:
        msg = f"Octave range needs j1 < j2, got [{j1}, {j2}]"
        raise InsufficientOctavesError(msg)
    present = set(diagram.j.tolist())
    if j1 not in present or j2 not in present:
        msg = f"Octave range [{j1}, {j2}] is outside the diagram (octaves {min(present)}..{max(present)})"
        raise InsufficientOctavesError(msg)
    mask = (diagram.j >= j1) & (diagram.j <= j2)
    x = diagram.j[mask].astype(float)
    y = diagram.log2_mu[mask]
    w = diagram.weights[mask]
    if x.size < MIN_REGRESSION_OCTAVES:
        msg = f"Need at least {MIN_REGRESSION_OCTAVES} octaves, got {x.size}"
        raise InsufficientOctavesError(msg)

    s0, s1, s2 = w.sum(), (w * x).sum(), (w * x * x).sum()
    denom = s0 * s2 - s1 * s1
    slope = float((s0 * (w * x * y).sum() - s1 * (w * y).sum()) / denom)
    intercept = float(((w * y).sum() - slope * s1) / s0)
    resid = y - (intercept + slope * x)
    resid_var = float((w * resid**2).sum() / (x.size - 2))
    slope_se = math.sqrt(max(resid_var, 0.0) * s0 / denom)

    h = (slope + 1) / 2
    half_width = CI_Z * slope_se / 2
    LOGGER.debug("Logscale fit over [%d, %d]: slope %.4f +- %.4f, H=%.4f", j1, j2, slope, slope_se, h)
    return HurstEstimate(
        h=h,
        ci_low=h - half_width,
        ci_high=h + half_width,
        slope=slope,
        slope_se=slope_se,
        j1=j1,
        j2=j2,
        wavelet_order=diagram.wavelet_order,
    )


def fgn_autocovariance(h: float, lags: ArrayLike) -> np.ndarray:
    """Unit-variance fGn autocovariance 0.5 (|k+1|^2H - 2|k|^2H + |k-1|^2H)."""
    k = np.abs(np.asarray(lags, dtype=float))
    two_h = 2 * h
    return 0.5 * (np.abs(k + 1) ** two_h - 2 * k**two_h + np.abs(k - 1) ** two_h)


def fgn_generate(h: float, n: int, seed: int) -> np.ndarray:
    """
    Generate exact unit-variance fractional Gaussian noise by circulant embedding.

    Args:
        h: Hurst exponent in (0, 1)
        n: Length, a power of two
        seed: Master seed

    Returns:
        Array of n samples

    Raises:
        InvalidParameterError: If h or n is invalid
        EmbeddingError: If the circulant has an eigenvalue below -1e-12

    """
    if not 0 < h < 1:
        msg = f"Hurst exponent must lie in (0, 1), got {h}"
        raise InvalidParameterError(msg)
    if n < 1 or n & (n - 1):
        msg = f"Length must be a power of two, got {n}"
        raise InvalidParameterError(msg)

    gamma = fgn_autocovariance(h, np.arange(n + 1))
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eigenvalues = np.fft.fft(row).real
    if eigenvalues.min() < -EIGENVALUE_TOLERANCE:
        msg = f"Circulant embedding has a negative eigenvalue {eigenvalues.min():.3g} for H={h}"
        raise EmbeddingError(msg)
    eigenvalues = np.maximum(eigenvalues, 0.0)

    size = 2 * n
    rng = rng_for(seed, STREAM_FGN)
    normals = rng.standard_normal(size)
    weights = np.empty(size, dtype=complex)
    weights[0] = math.sqrt(eigenvalues[0]) * normals[0]
    weights[n] = math.sqrt(eigenvalues[n]) * normals[n]
    inner = np.sqrt(eigenvalues[1:n] / 2) * (normals[1:n] + 1j * normals[n + 1 :])
    weights[1:n] = inner
    weights[n + 1 :] = np.conj(inner[::-1])
    return np.fft.fft(weights).real[:n] / math.sqrt(size)

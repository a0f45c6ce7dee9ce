"""Tests for the logscale diagram estimator and the fGn generator."""

from __future__ import annotations

import numpy as np
import pytest

from hybridburst.exceptions import (
    DegenerateDiagramError,
    InsufficientOctavesError,
    InvalidParameterError,
    InvalidWaveletOrderError,
    SeriesTooShortError,
)
from hybridburst.helpers import rng_for
from hybridburst.wavelet import (
    LN2,
    LogscaleDiagram,
    OctaveStat,
    deepest_octave,
    dwt_coefficients,
    dwt_logscale,
    estimate_hurst,
    fgn_autocovariance,
    fgn_generate,
    log2_bias,
)


def _line_diagram(slope: float, octaves: range) -> LogscaleDiagram:
    stats = tuple(
        OctaveStat(
            j=j, n_coeffs=2 ** (20 - j), mu=2.0 ** (slope * j), log2_mu=slope * j + 0.3, weight=LN2**2 * 2 ** (19 - j)
        )
        for j in octaves
    )
    return LogscaleDiagram(octaves=stats, wavelet_order=3)


def test_deepest_octave():
    assert deepest_octave(2**22, 3) == 18
    assert deepest_octave(2**16, 3) == 12
    assert deepest_octave(16, 3) == 0


def test_energy_is_conserved():
    series = rng_for(1, 0).standard_normal(2**14)
    coeffs = dwt_coefficients(series, 3)
    energy = sum(float(np.sum(c**2)) for c in coeffs)
    assert energy == pytest.approx(float(np.sum(series**2)), rel=1e-9)


@pytest.mark.parametrize("order", [1, 2, 3, 5])
def test_polynomials_are_annihilated(order):
    t = np.arange(1024) / 1024
    for degree in range(order):
        series = t**degree + 0.5
        detail = dwt_coefficients(series, order, level=1)[-1][order:-order]
        assert np.max(np.abs(detail)) < 1e-8


def test_bias_is_negative_and_vanishes():
    assert log2_bias(4) < 0
    assert abs(log2_bias(10**6)) < 1e-5


def test_exact_line_gives_exact_slope():
    estimate = estimate_hurst(_line_diagram(0.4, range(3, 12)), 4, 10)
    assert estimate.slope == pytest.approx(0.4)
    assert estimate.h == pytest.approx(0.7)
    assert estimate.ci_high - estimate.ci_low == pytest.approx(0.0, abs=1e-9)
    assert estimate.covers(0.7)
    assert (estimate.j1, estimate.j2, estimate.wavelet_order) == (4, 10, 3)


def test_too_few_octaves():
    with pytest.raises(InsufficientOctavesError):
        estimate_hurst(_line_diagram(0.4, range(1, 6)), 2, 3)
    with pytest.raises(InsufficientOctavesError):
        estimate_hurst(_line_diagram(0.4, range(1, 6)), 3, 9)
    with pytest.raises(InsufficientOctavesError):
        estimate_hurst(_line_diagram(0.4, range(1, 6)), 4, 2)


def test_constant_series_is_degenerate():
    diagram = dwt_logscale(np.full(4096, 3.0))
    assert diagram.degenerate
    with pytest.raises(DegenerateDiagramError):
        estimate_hurst(diagram, 2, 6)


def test_short_series():
    with pytest.raises(SeriesTooShortError):
        dwt_logscale(np.ones(8))


@pytest.mark.parametrize("order", [0, 11])
def test_wavelet_order_range(order):
    with pytest.raises(InvalidWaveletOrderError):
        dwt_logscale(np.ones(1024), order)


def test_white_noise_is_flat():
    series = rng_for(3, 0).standard_normal(2**16)
    estimate = estimate_hurst(dwt_logscale(series), 1, 10)
    assert estimate.h == pytest.approx(0.5, abs=0.05)


def test_diagram_csv(tmp_path):
    diagram = dwt_logscale(rng_for(4, 0).standard_normal(2**12), max_octave=5)
    text = diagram.to_csv(tmp_path / "diagram.csv").read_text(encoding="utf-8").splitlines()
    assert text[0] == "octave,n_coeffs,log2_variance,weight"
    assert len(text) == 6


def test_fgn_autocovariance_at_lag_one():
    assert fgn_autocovariance(0.7, [0])[0] == pytest.approx(1.0)
    assert fgn_autocovariance(0.7, [1])[0] == pytest.approx(0.5 * (2**1.4 - 2))
    assert fgn_autocovariance(0.5, [3])[0] == pytest.approx(0.0)


def test_fgn_moments():
    noise = fgn_generate(0.7, 2**16, seed=5)
    assert noise.var() == pytest.approx(1.0, abs=0.05)
    lag1 = np.corrcoef(noise[:-1], noise[1:])[0, 1]
    assert lag1 == pytest.approx(0.5 * (2**1.4 - 2), abs=0.03)


def test_fgn_is_seeded():
    np.testing.assert_array_equal(fgn_generate(0.6, 256, seed=1), fgn_generate(0.6, 256, seed=1))


@pytest.mark.parametrize(("h", "n"), [(0.0, 256), (1.0, 256), (0.7, 100)])
def test_fgn_rejects(h, n):
    with pytest.raises(InvalidParameterError):
        fgn_generate(h, n, seed=1)


def test_fgn_estimate_quick():
    estimates = [estimate_hurst(dwt_logscale(fgn_generate(0.7, 2**16, seed=s)), 3, 11).h for s in range(20)]
    assert np.mean(estimates) == pytest.approx(0.7, abs=0.03)


@pytest.mark.slow
@pytest.mark.parametrize("h", [0.6, 0.7, 0.8])
def test_estimator_calibration(h):
    estimates = [estimate_hurst(dwt_logscale(fgn_generate(h, 2**20, seed=s)), 4, 16) for s in range(100)]
    values = np.array([e.h for e in estimates])
    assert abs(values.mean() - h) <= 0.02
    assert sum(e.covers(h) for e in estimates) >= 85


def test_diagram_ignores_constant_offset():
    x = rng_for(31, 0).standard_normal(2**14)
    base = dwt_logscale(x)
    shifted = dwt_logscale(x + 5.0)
    np.testing.assert_array_equal(shifted.j, base.j)
    np.testing.assert_allclose(shifted.log2_mu, base.log2_mu, rtol=0, atol=1e-8)
    assert estimate_hurst(shifted, 2, 9).h == pytest.approx(estimate_hurst(base, 2, 9).h, abs=1e-8)

"""Tests for the on-off process and its renewal solution."""

from __future__ import annotations

import logging

import numpy as np
import pytest

from hybridburst.exceptions import DomainError, GridTooCoarseError, InvalidParameterError
from hybridburst.onoff import (
    AutocovTable,
    OnOffParams,
    OnOffState,
    new_stationary_path,
    r_tail_asymptote,
    sample_ensemble,
    solve_pi11,
)


def test_stationary_moments(preset_onoff):
    assert preset_onoff.mu_w == pytest.approx(0.5)
    assert preset_onoff.sigma_w_sq == pytest.approx(0.25)
    assert preset_onoff.alpha_min == 1.4
    assert preset_onoff.equal_indices


def test_mu_max_follows_larger_index(distinct_onoff):
    assert distinct_onoff.mu_max == pytest.approx(150.0)
    flipped = OnOffParams.from_means(1.7, 150.0, 1.4, 100.0)
    assert flipped.mu_max == pytest.approx(150.0)
    assert flipped.law(OnOffState.ON) is flipped.on


def test_sigma_lim_sq_closed_form(distinct_onoff):
    a = 1.4
    mu_w = 100.0 / 250.0
    expected = 2 * 150.0**2 / (mu_w**3 * (a - 1) * (3 - a) * (2 - a))
    assert distinct_onoff.sigma_lim_sq == pytest.approx(expected)


def test_sigma_lim_sq_domain():
    light = OnOffParams.from_means(2.5, 100.0, 2.2, 100.0)
    with pytest.raises(DomainError):
        _ = light.sigma_lim_sq


def test_path_queries_compose(preset_onoff):
    whole = new_stationary_path(preset_onoff, 5).sample_at_ticks(5000)
    path = new_stationary_path(preset_onoff, 5)
    parts = np.concatenate([path.sample_at_ticks(1234), path.sample_at_ticks(0), path.sample_at_ticks(3766)])
    np.testing.assert_array_equal(whole, parts)
    assert path.clock == 5000
    assert path.residual > 0


def test_path_rejects_negative_count(preset_onoff):
    with pytest.raises(InvalidParameterError):
        new_stationary_path(preset_onoff, 1).sample_at_ticks(-1)


def test_ensemble_is_stationary(distinct_onoff):
    n = 20_000
    states = sample_ensemble(distinct_onoff, n, [0, 777, 5000], seed=3)
    assert states.shape == (n, 3)
    se = np.sqrt(distinct_onoff.sigma_w_sq / n)
    for column in states.T:
        assert abs(column.mean() - distinct_onoff.mu_w) < 4 * se


def test_ensemble_rejects_unsorted_ticks(preset_onoff):
    with pytest.raises(InvalidParameterError):
        sample_ensemble(preset_onoff, 10, [5, 3], seed=1)


def test_renewal_solution_basics(distinct_onoff):
    table = solve_pi11(distinct_onoff, horizon=2000.0)
    assert table.values[0] == distinct_onoff.sigma_w_sq
    assert table.pi11[0] == 1.0
    assert np.all((table.pi11 >= 0) & (table.pi11 <= 1))
    assert table.horizon >= 2000.0
    assert 0 < table.r_at(2000.0) < table.r_at(100.0) < distinct_onoff.sigma_w_sq


def test_renewal_solution_is_lipschitz(distinct_onoff):
    table = solve_pi11(distinct_onoff, horizon=3000.0)
    on, off = distinct_onoff.on, distinct_onoff.off
    bound = 2 * (1 / on.mean + on.alpha / on.x_m + off.alpha / off.x_m)
    assert np.max(np.abs(np.diff(table.pi11))) <= bound * table.dt


def test_grid_too_coarse(distinct_onoff):
    with pytest.raises(GridTooCoarseError):
        solve_pi11(distinct_onoff, dt=distinct_onoff.min_scale / 3, horizon=100.0)


def test_horizon_shorter_than_step(distinct_onoff):
    with pytest.raises(InvalidParameterError):
        solve_pi11(distinct_onoff, dt=1.0, horizon=0.5)


def test_r_at_outside_grid(distinct_onoff):
    table = solve_pi11(distinct_onoff, horizon=500.0)
    with pytest.raises(InvalidParameterError):
        table.r_at(table.horizon + 10)


def _ensemble_autocovariance(params, lags, n, seed):
    states = sample_ensemble(params, n, lags, seed=seed).astype(float)
    centered = states - params.mu_w
    products = centered[:, :1] * centered
    return products.mean(axis=0), products.std(axis=0, ddof=1) / np.sqrt(n)


def test_renewal_solution_matches_monte_carlo(distinct_onoff):
    lags = [0, 5, 40, 150, 600]
    table = solve_pi11(distinct_onoff, horizon=700.0)
    mean, se = _ensemble_autocovariance(distinct_onoff, lags, 40_000, seed=17)
    for i, lag in enumerate(lags):
        assert abs(mean[i] - table.r_at(lag)) < 4 * se[i]


@pytest.mark.slow
def test_renewal_solution_matches_monte_carlo_at_long_lags(preset_onoff):
    lags = [1, 10, 100, 300, 1000]
    table = solve_pi11(preset_onoff, horizon=1000.0)
    mean, se = _ensemble_autocovariance(preset_onoff, lags, 200_000, seed=29)
    for i, lag in enumerate(lags):
        assert abs(mean[i] - table.r_at(lag)) < 3 * se[i], lag


def test_renewal_solution_is_grid_stable(preset_onoff):
    # A full-weight diagonal cell would shift r by about half_cell and scale with dt
    coarse = solve_pi11(preset_onoff, horizon=1000.0)
    fine = solve_pi11(preset_onoff, dt=coarse.dt / 4, horizon=1000.0)
    half_cell = 0.5 * preset_onoff.mu_w * coarse.dt / (preset_onoff.on.mean + preset_onoff.off.mean)
    for lag in (100.0, 1000.0):
        assert abs(coarse.r_at(lag) - fine.r_at(lag)) < 0.25 * half_cell


def test_table_csv_round_trip(tmp_path, distinct_onoff):
    table = solve_pi11(distinct_onoff, horizon=300.0)
    loaded = AutocovTable.from_csv(table.to_csv(tmp_path / "r.csv"))
    assert loaded.dt == pytest.approx(table.dt)
    np.testing.assert_allclose(loaded.values, table.values, rtol=1e-15)


@pytest.mark.slow
def test_tail_exponent_matches_index(preset_onoff, preset_table, caplog):
    with caplog.at_level(logging.WARNING, logger="hybridburst"):
        fit = r_tail_asymptote(preset_onoff, preset_table)
    assert fit.exponent == pytest.approx(-0.4)
    assert abs(fit.fitted_exponent - fit.exponent) < 0.05
    assert fit.c_r > 0
    assert fit.l_r > 0
    assert fit.outside_scope
    assert "Equal on/off tail indices" in caplog.text


def test_tail_fit_distinct_indices_in_scope(distinct_onoff):
    fit = r_tail_asymptote(distinct_onoff, horizon=20_000.0)
    assert not fit.outside_scope
    assert fit.u_low == pytest.approx(fit.u_high / 10, rel=1e-2)

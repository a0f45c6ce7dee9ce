"""Tests for hybrid trace synthesis."""

from __future__ import annotations

import numpy as np
import pytest

from hybridburst.const import SESSION_BLOCK_SIZE
from hybridburst.exceptions import InvalidParameterError, TraceFormatError
from hybridburst.onoff import OnOffParams, solve_pi11
from hybridburst.sessions import GenerationMode
from hybridburst.workload import Trace, aggregate, cumulative, nonrandom_centered, synthesize


def test_trace_invariants(series2, preset_onoff):
    trace = synthesize(series2, preset_onoff, 4096, seed=21)
    assert trace.n_ticks == 4096
    assert np.all(trace.a >= 0)
    assert np.all(trace.a <= trace.b)
    np.testing.assert_allclose(trace.c, preset_onoff.mu_w * trace.b - trace.a)
    assert trace.meta["n_sessions"] > 0
    assert trace.meta["onoff_seed"] == 21


def test_worker_count_does_not_change_counts(series2, preset_onoff):
    n_ticks = 20_000
    single = synthesize(series2, preset_onoff, n_ticks, seed=5, workers=1)
    assert single.meta["n_sessions"] > SESSION_BLOCK_SIZE
    threaded = synthesize(series2, preset_onoff, n_ticks, seed=5, workers=3)
    np.testing.assert_array_equal(single.a, threaded.a)
    np.testing.assert_array_equal(single.b, threaded.b)


def test_layers_have_independent_seeds(series2, preset_onoff):
    base = synthesize(series2, preset_onoff, 2000, seed=7)
    other = synthesize(series2, preset_onoff, 2000, seed=7, onoff_seed=8)
    np.testing.assert_array_equal(base.b, other.b)
    assert not np.array_equal(base.a, other.a)


def test_warmup_mode_recorded(series2, preset_onoff):
    trace = synthesize(series2, preset_onoff, 1000, GenerationMode.WARMUP, seed=1, discard=3000.0)
    assert trace.meta["mode"] == "warmup"
    assert trace.meta["discard"] == 3000.0


def test_rejects_empty_trace(series2, preset_onoff):
    with pytest.raises(InvalidParameterError):
        synthesize(series2, preset_onoff, 0)


def test_binary_round_trip_recovers_weight(tmp_path, series2, preset_onoff):
    trace = synthesize(series2, preset_onoff, 1500, seed=9)
    loaded = Trace.from_binary(trace.to_binary(tmp_path / "trace.bin"))
    np.testing.assert_array_equal(loaded.a, trace.a)
    np.testing.assert_array_equal(loaded.b, trace.b)
    np.testing.assert_array_equal(loaded.c, trace.c)
    assert loaded.mu_w == pytest.approx(preset_onoff.mu_w)


def test_csv_round_trip(tmp_path, series2, preset_onoff):
    trace = synthesize(series2, preset_onoff, 300, seed=10)
    loaded = Trace.from_csv(trace.to_csv(tmp_path / "trace.csv"), preset_onoff.mu_w)
    np.testing.assert_array_equal(loaded.a, trace.a)
    np.testing.assert_allclose(loaded.c, trace.c)


def test_binary_rejects_bad_magic(series2, preset_onoff):
    payload = bytearray(synthesize(series2, preset_onoff, 10, seed=1).to_bytes())
    payload[0] ^= 0xFF
    with pytest.raises(TraceFormatError):
        Trace.from_bytes(bytes(payload))


def test_binary_rejects_truncated_body(series2, preset_onoff):
    payload = synthesize(series2, preset_onoff, 10, seed=1).to_bytes()
    with pytest.raises(TraceFormatError):
        Trace.from_bytes(payload[:-3])


def test_helpers(series2, preset_onoff):
    trace = synthesize(series2, preset_onoff, 100, seed=2)
    np.testing.assert_allclose(cumulative(trace)[-1], trace.c.sum())
    expected = trace.a - preset_onoff.mu_w * series2.expected_live
    np.testing.assert_allclose(nonrandom_centered(trace, series2, preset_onoff), expected)
    blocks = aggregate(np.arange(10), 3)
    np.testing.assert_array_equal(blocks, [3, 12, 21])
    with pytest.raises(InvalidParameterError):
        aggregate(np.arange(10), 0)


@pytest.mark.slow
def test_poisson_variance_identity(series3, preset_onoff):
    n_seeds = 1500
    values = np.array([synthesize(series3, preset_onoff, 1, seed=s).c[0] for s in range(n_seeds)])
    target = series3.rate * preset_onoff.sigma_w_sq * series3.lifetime.mean
    assert abs(values.mean()) < 4 * np.sqrt(target / n_seeds)
    se = np.sqrt((np.mean((values - values.mean()) ** 4) - values.var() ** 2) / n_seeds)
    assert abs(values.var(ddof=1) - target) < 4 * se


@pytest.mark.slow
def test_poisson_covariance_identity(series3, preset_onoff):
    lags = [10, 50, 200]
    n_seeds = 1500
    table = solve_pi11(preset_onoff, horizon=250.0)
    columns = np.array([synthesize(series3, preset_onoff, 201, seed=s).c[[0, *lags]] for s in range(n_seeds)])
    for i, lag in enumerate(lags, start=1):
        products = columns[:, 0] * columns[:, i]
        expected = series3.rate * table.r_at(lag) * series3.lifetime.integrated_tail(lag)
        se = products.std(ddof=1) / np.sqrt(n_seeds)
        assert abs(products.mean() - expected) < 4 * se


def test_cumulative_sums_centered_series():
    trace = Trace(a=np.array([1, 2, 1]), b=np.array([4, 2, 6]), mu_w=0.5)
    np.testing.assert_allclose(trace.c, [1.0, -1.0, 2.0])
    np.testing.assert_allclose(cumulative(trace), [1.0, 0.0, 2.0])


def test_always_on_limit_centers_to_zero(series2):
    always_on = OnOffParams.from_means(1.4, 1e9, 1.4, 1.0)
    trace = synthesize(series2, always_on, 2048, seed=4)
    np.testing.assert_array_equal(trace.a, trace.b)
    assert np.max(np.abs(trace.c)) / trace.b.max() < 1e-6

"""Shared fixtures for the hybridburst tests."""

from __future__ import annotations

import pytest

from hybridburst.const import PRESET_ON_OFF_ALPHA, PRESET_ON_OFF_MEAN, PRESET_SERIES
from hybridburst.onoff import OnOffParams, solve_pi11
from hybridburst.sessions import SessionParams


def series_sessions(series_id: int) -> SessionParams:
    """Session parameters of a reproduction preset."""
    row = PRESET_SERIES[series_id]
    return SessionParams.from_means(row["rate"], row["alpha_sess"], row["mu_sess"])


@pytest.fixture(scope="session")
def preset_onoff() -> OnOffParams:
    """On-off parameters shared by every preset."""
    return OnOffParams.from_means(PRESET_ON_OFF_ALPHA, PRESET_ON_OFF_MEAN, PRESET_ON_OFF_ALPHA, PRESET_ON_OFF_MEAN)


@pytest.fixture(scope="session")
def distinct_onoff() -> OnOffParams:
    """On-off parameters with distinct tail indices."""
    return OnOffParams.from_means(1.4, 100.0, 1.7, 150.0)


@pytest.fixture(scope="session")
def preset_table(preset_onoff):
    """Renewal solution for the preset on-off process out to 1e5."""
    return solve_pi11(preset_onoff, horizon=1e5)


@pytest.fixture
def series1() -> SessionParams:
    return series_sessions(1)


@pytest.fixture
def series2() -> SessionParams:
    return series_sessions(2)


@pytest.fixture
def series3() -> SessionParams:
    return series_sessions(3)


@pytest.fixture
def series4() -> SessionParams:
    return series_sessions(4)

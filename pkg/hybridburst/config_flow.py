"""Configuration loading: INI files, reproduction presets and CLI overrides."""

from __future__ import annotations

import configparser
import math
from pathlib import Path
from typing import TYPE_CHECKING, Any

import voluptuous as vol

from .const import (
    CONF_ALPHA,
    CONF_ALPHA_OFF,
    CONF_ALPHA_ON,
    CONF_DIR,
    CONF_DISCARD,
    CONF_DUMP_TRACES,
    CONF_EXPERIMENT,
    CONF_MEAN,
    CONF_MEAN_OFF,
    CONF_MEAN_ON,
    CONF_MODE,
    CONF_OCTAVES,
    CONF_ONOFF,
    CONF_ORDER,
    CONF_OUTPUT,
    CONF_RATE,
    CONF_REPLICATES,
    CONF_SEED,
    CONF_SERIES,
    CONF_SESSIONS,
    CONF_TICKS,
    CONF_TIMEOUT,
    CONF_TRUNCATE,
    CONF_WAVELET,
    CONF_WORKERS,
    DEFAULT_REPLICATES,
    DEFAULT_SEED,
    DEFAULT_TICKS,
    DEFAULT_WAVELET_ORDER,
    LOGGER,
    MAX_WAVELET_ORDER,
    MIN_REGRESSION_OCTAVES,
    MIN_WAVELET_ORDER,
    MODE_EXACT,
    MODE_WARMUP,
    PRESET_OCTAVES,
    PRESET_ON_OFF_ALPHA,
    PRESET_ON_OFF_MEAN,
    PRESET_SERIES,
    SERIES4_REPLICATES,
)
from .data import ExperimentConfig
from .exceptions import ConfigError, UnknownSeriesError
from .onoff import OnOffParams
from .sessions import GenerationMode, SessionParams
from .wavelet import deepest_octave

if TYPE_CHECKING:
    import os
    from collections.abc import Mapping

# Flat CLI flag -> INI section
OVERRIDE_SECTIONS: dict[str, str] = {
    CONF_TICKS: CONF_EXPERIMENT,
    CONF_REPLICATES: CONF_EXPERIMENT,
    CONF_SEED: CONF_EXPERIMENT,
    CONF_MODE: CONF_EXPERIMENT,
    CONF_DISCARD: CONF_EXPERIMENT,
    CONF_TRUNCATE: CONF_EXPERIMENT,
    CONF_TIMEOUT: CONF_EXPERIMENT,
    CONF_WORKERS: CONF_EXPERIMENT,
    CONF_SERIES: CONF_EXPERIMENT,
    CONF_ORDER: CONF_WAVELET,
    CONF_OCTAVES: CONF_WAVELET,
    CONF_DIR: CONF_OUTPUT,
    CONF_DUMP_TRACES: CONF_OUTPUT,
}


def octave_range(value: Any) -> tuple[int, int]:
    """Parse an octave range given as "j1:j2" or a pair."""
    if isinstance(value, str):
        parts = value.split(":")
    elif isinstance(value, (tuple, list)):
        parts = list(value)
    else:
        msg = f"Expected an octave range j1:j2, got {value!r}"
        raise vol.Invalid(msg)
    if len(parts) != 2:
        msg = f"Expected an octave range j1:j2, got {value!r}"
        raise vol.Invalid(msg)
    try:
        j1, j2 = (int(p) for p in parts)
    except (TypeError, ValueError) as err:
        msg = f"Octave bounds must be integers, got {value!r}"
        raise vol.Invalid(msg) from err
    if not 1 <= j1 < j2:
        msg = f"Octave range needs 1 <= j1 < j2, got {j1}:{j2}"
        raise vol.Invalid(msg)
    return j1, j2


def _positive_float() -> vol.All:
    return vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False))


def _index() -> vol.All:
    return vol.All(vol.Coerce(float), vol.Range(min=1, min_included=False))


SESSIONS_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_RATE): _positive_float(),
        vol.Required(CONF_ALPHA): _index(),
        vol.Required(CONF_MEAN): _positive_float(),
    }
)

ONOFF_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_ALPHA_ON, default=PRESET_ON_OFF_ALPHA): _index(),
        vol.Optional(CONF_MEAN_ON, default=PRESET_ON_OFF_MEAN): _positive_float(),
        vol.Optional(CONF_ALPHA_OFF, default=PRESET_ON_OFF_ALPHA): _index(),
        vol.Optional(CONF_MEAN_OFF, default=PRESET_ON_OFF_MEAN): _positive_float(),
    }
)

EXPERIMENT_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_SERIES): vol.Any(None, vol.Coerce(int)),
        vol.Optional(CONF_TICKS, default=DEFAULT_TICKS): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_REPLICATES, default=DEFAULT_REPLICATES): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_SEED, default=DEFAULT_SEED): vol.All(vol.Coerce(int), vol.Range(min=0)),
        vol.Optional(CONF_MODE, default=MODE_EXACT): vol.In([MODE_EXACT, MODE_WARMUP]),
        vol.Optional(CONF_DISCARD, default=None): vol.Any(None, vol.All(vol.Coerce(float), vol.Range(min=0))),
        vol.Optional(CONF_TRUNCATE, default=False): vol.Boolean(),
        vol.Optional(CONF_TIMEOUT, default=None): vol.Any(None, _positive_float()),
        vol.Optional(CONF_WORKERS, default=None): vol.Any(None, vol.All(vol.Coerce(int), vol.Range(min=1))),
    }
)

WAVELET_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_ORDER, default=DEFAULT_WAVELET_ORDER): vol.All(
            vol.Coerce(int), vol.Range(min=MIN_WAVELET_ORDER, max=MAX_WAVELET_ORDER)
        ),
        vol.Optional(CONF_OCTAVES, default=None): vol.Any(None, octave_range),
    }
)

OUTPUT_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_DIR, default=None): vol.Any(None, vol.Coerce(Path)),
        vol.Optional(CONF_DUMP_TRACES, default=False): vol.Boolean(),
    }
)

SECTION_SCHEMAS: dict[str, vol.Schema] = {
    CONF_SESSIONS: SESSIONS_SCHEMA,
    CONF_ONOFF: ONOFF_SCHEMA,
    CONF_EXPERIMENT: EXPERIMENT_SCHEMA,
    CONF_WAVELET: WAVELET_SCHEMA,
    CONF_OUTPUT: OUTPUT_SCHEMA,
}


def load_config_file(path: str | os.PathLike[str]) -> dict[str, dict[str, str]]:
    """
    Read an INI configuration file into raw (unvalidated) sections.

    Raises:
        ConfigError: If the file is missing, malformed or has unknown sections

    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with Path(path).open(encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as err:
        msg = f"Cannot read configuration file {path}: {err}"
        raise ConfigError(msg) from err
    except configparser.Error as err:
        msg = f"Malformed configuration file {path}: {err}"
        raise ConfigError(msg) from err
    unknown = set(parser.sections()) - set(SECTION_SCHEMAS)
    if unknown:
        msg = f"Unknown configuration sections in {path}: {', '.join(sorted(unknown))}"
        raise ConfigError(msg)
    return {section: dict(parser.items(section)) for section in parser.sections()}


def preset_sections(series_id: int) -> dict[str, dict[str, Any]]:
    """
    Return the raw sections of a reproduction preset (series 1 to 4).

    Raises:
        UnknownSeriesError: For any other series number

    """
    if series_id not in PRESET_SERIES:
        msg = f"Unknown series {series_id}; presets are {sorted(PRESET_SERIES)}"
        raise UnknownSeriesError(msg)
    row = PRESET_SERIES[series_id]
    return {
        CONF_SESSIONS: {CONF_RATE: row["rate"], CONF_ALPHA: row["alpha_sess"], CONF_MEAN: row["mu_sess"]},
        CONF_ONOFF: {
            CONF_ALPHA_ON: PRESET_ON_OFF_ALPHA,
            CONF_MEAN_ON: PRESET_ON_OFF_MEAN,
            CONF_ALPHA_OFF: PRESET_ON_OFF_ALPHA,
            CONF_MEAN_OFF: PRESET_ON_OFF_MEAN,
        },
        CONF_EXPERIMENT: {
            CONF_SERIES: series_id,
            CONF_REPLICATES: SERIES4_REPLICATES if series_id == 4 else DEFAULT_REPLICATES,
        },
    }


def default_octave_range(n_ticks: int, mu_sess: float, wavelet_order: int = DEFAULT_WAVELET_ORDER) -> tuple[int, int]:
    """
    Pick regression octaves for a configuration without explicit ones.

    j2 = min(log2(n_ticks) - 2, deepest usable octave) and
    j1 = min(ceil(log2 mu_sess) + 2, j2 - 2), at least 1.
    """
    deepest = deepest_octave(n_ticks, wavelet_order)
    j2 = min(n_ticks.bit_length() - 1 - 2, deepest)
    j1 = max(1, min(math.ceil(math.log2(mu_sess)) + 2, j2 - MIN_REGRESSION_OCTAVES + 1))
    return j1, j2


def _merge(*layers: Mapping[str, Mapping[str, Any]]) -> dict[str, dict[str, Any]]:
    merged: dict[str, dict[str, Any]] = {}
    for layer in layers:
        for section, values in layer.items():
            merged.setdefault(section, {}).update(values)
    return merged


def _validate(section: str, values: Mapping[str, Any]) -> dict[str, Any]:
    try:
        return SECTION_SCHEMAS[section](dict(values))
    except vol.Invalid as err:
        msg = f"Invalid [{section}] configuration: {err}"
        raise ConfigError(msg) from err


def build_experiment(
    raw: Mapping[str, Mapping[str, Any]] | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> ExperimentConfig:
    """
    Build a validated ExperimentConfig.

    Layers are applied in order: preset (when a series is named), file
    sections, then flat CLI overrides (None values are ignored). Preset
    octave ranges apply only to the default trace length.

    Args:
        raw: Sections as returned by load_config_file
        overrides: Flat flag values keyed by CONF_* names

    Returns:
        ExperimentConfig

    Raises:
        ConfigError: On invalid or missing values
        UnknownSeriesError: On an unknown series number

    """
    raw = raw or {}
    flags: dict[str, dict[str, Any]] = {}
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in OVERRIDE_SECTIONS:
            msg = f"Unknown override {key}"
            raise ConfigError(msg)
        flags.setdefault(OVERRIDE_SECTIONS[key], {})[key] = value

    series = flags.get(CONF_EXPERIMENT, {}).get(CONF_SERIES, raw.get(CONF_EXPERIMENT, {}).get(CONF_SERIES))
    base: dict[str, dict[str, Any]] = {}
    if series is not None:
        try:
            series = int(series)
        except (TypeError, ValueError) as err:
            msg = f"Series must be an integer, got {series!r}"
            raise ConfigError(msg) from err
        base = preset_sections(series)

    merged = _merge(base, raw, flags)
    if CONF_SESSIONS not in merged:
        msg = "A [sessions] section or a series preset is required"
        raise ConfigError(msg)
    sections = {section: _validate(section, merged.get(section, {})) for section in SECTION_SCHEMAS}

    sess_conf = sections[CONF_SESSIONS]
    oo_conf = sections[CONF_ONOFF]
    exp_conf = sections[CONF_EXPERIMENT]
    wav_conf = sections[CONF_WAVELET]
    out_conf = sections[CONF_OUTPUT]

    n_ticks = exp_conf[CONF_TICKS]
    order = wav_conf[CONF_ORDER]
    octaves = wav_conf[CONF_OCTAVES]
    if octaves is None:
        if series is not None and n_ticks == DEFAULT_TICKS:
            j1, j2 = PRESET_OCTAVES[series]
            octaves = (j1, min(j2, deepest_octave(n_ticks, order)))
        else:
            octaves = default_octave_range(n_ticks, sess_conf[CONF_MEAN], order)
        LOGGER.debug("Using octave range %d:%d for %d ticks", octaves[0], octaves[1], n_ticks)

    sess = SessionParams.from_means(sess_conf[CONF_RATE], sess_conf[CONF_ALPHA], sess_conf[CONF_MEAN])
    oo = OnOffParams.from_means(
        oo_conf[CONF_ALPHA_ON],
        oo_conf[CONF_MEAN_ON],
        oo_conf[CONF_ALPHA_OFF],
        oo_conf[CONF_MEAN_OFF],
    )
    return ExperimentConfig(
        sess=sess,
        oo=oo,
        n_ticks=n_ticks,
        replicates=exp_conf[CONF_REPLICATES],
        seed=exp_conf[CONF_SEED],
        octave_range=octaves,
        wavelet_order=order,
        mode=GenerationMode(exp_conf[CONF_MODE]),
        discard=exp_conf[CONF_DISCARD],
        truncate=exp_conf[CONF_TRUNCATE],
        series=series,
        output_dir=out_conf[CONF_DIR],
        dump_traces=out_conf[CONF_DUMP_TRACES],
        replicate_timeout=exp_conf[CONF_TIMEOUT],
        workers=exp_conf[CONF_WORKERS],
    )


def preset(series_id: int, **overrides: Any) -> ExperimentConfig:
    """
    Return the reproduction preset of a series, with optional flag overrides.

    Raises:
        UnknownSeriesError: For a series other than 1 to 4

    """
    return build_experiment({}, {**overrides, CONF_SERIES: series_id})

"""Command line interface: simulate, estimate, theory and reproduce."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import TYPE_CHECKING, Any

import colorlog
import voluptuous as vol

from .config_flow import build_experiment, load_config_file, octave_range
from .const import (
    CONF_DIR,
    CONF_DISCARD,
    CONF_DUMP_TRACES,
    CONF_MODE,
    CONF_OCTAVES,
    CONF_ORDER,
    CONF_REPLICATES,
    CONF_SEED,
    CONF_SERIES,
    CONF_TICKS,
    CONF_TIMEOUT,
    CONF_TRUNCATE,
    CONF_WORKERS,
    DEFAULT_WAVELET_ORDER,
    EXIT_INVALID_CONFIG,
    EXIT_OK,
    EXIT_RUNTIME_FAILURE,
    EXIT_UNSUPPORTED_CASE,
    LOGGER,
    MODE_EXACT,
    MODE_WARMUP,
    NAME,
    VERSION,
)
from .coordinator import run
from .data import ExperimentConfig
from .exceptions import (
    ConfigError,
    HybridBurstError,
    InvalidParameterError,
    ReplicateError,
    UnsupportedCaseError,
)
from .scaling import hurst_formulas, theory_report_from_indices
from .wavelet import deepest_octave, dwt_logscale, estimate_hurst
from .workload import Trace, synthesize

if TYPE_CHECKING:
    from collections.abc import Sequence

LOG_FORMAT = "%(log_color)s%(levelname)-8s%(reset)s %(name)s: %(message)s"


def setup_logging(verbose: bool = False, quiet: bool = False) -> None:
    """Attach a colored stream handler to the package logger."""
    handler = colorlog.StreamHandler()
    handler.setFormatter(colorlog.ColoredFormatter(LOG_FORMAT))
    LOGGER.handlers.clear()
    LOGGER.addHandler(handler)
    if verbose:
        LOGGER.setLevel(logging.DEBUG)
    elif quiet:
        LOGGER.setLevel(logging.WARNING)
    else:
        LOGGER.setLevel(logging.INFO)


def _emit(data: dict[str, Any]) -> None:
    sys.stdout.write(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _add_experiment_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="INI configuration file")
    parser.add_argument("--series", type=int, help="Reproduction preset 1-4")
    parser.add_argument("--ticks", type=int, help="Trace length")
    parser.add_argument("--seed", type=int, help="Master seed")
    parser.add_argument("--mode", choices=[MODE_EXACT, MODE_WARMUP], help="Stationary initialization")
    parser.add_argument("--discard", type=float, help="Warm-up length in warmup mode")
    parser.add_argument("--truncate", action="store_const", const=True, help="Floor session durations")
    parser.add_argument("--workers", type=int, help="Worker count (capped by HYBRIDBURST_THREADS)")


def _add_wavelet_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--octaves", type=str, help="Regression octaves j1:j2")
    parser.add_argument("--wavelet", type=int, dest="order", help="Daubechies order N")


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser."""
    parser = argparse.ArgumentParser(prog=NAME, description="Hybrid session/on-off traffic lab")
    parser.add_argument("--version", action="version", version=f"{NAME} {VERSION}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="Warnings only")
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="Synthesize one trace")
    _add_experiment_args(simulate)
    simulate.add_argument("--out", type=Path, required=True, help="Trace file (.csv or binary)")

    estimate = sub.add_parser("estimate", help="Estimate H from a trace file")
    estimate.add_argument("trace", type=Path, help="Trace file written by simulate")
    estimate.add_argument("--mu-w", type=float, help="Centering weight for CSV traces")
    estimate.add_argument("--diagram", type=Path, help="Write the logscale diagram CSV here")
    _add_wavelet_args(estimate)

    theory = sub.add_parser("theory", help="Print the theory report")
    theory.add_argument("--config", type=Path, help="INI configuration file")
    theory.add_argument("--series", type=int, help="Reproduction preset 1-4")
    theory.add_argument("--alpha-min", type=float, help="Smaller on/off tail index")
    theory.add_argument("--alpha-sess", type=float, help="Session lifetime tail index")
    theory.add_argument("--out", type=Path, help="Also write the report JSON here")

    reproduce = sub.add_parser("reproduce", help="Run a multi-replicate experiment")
    _add_experiment_args(reproduce)
    _add_wavelet_args(reproduce)
    reproduce.add_argument("--replicates", type=int, help="Number of replicates")
    reproduce.add_argument("--out-dir", type=Path, dest="dir", help="Output directory")
    reproduce.add_argument("--dump-traces", action="store_const", const=True, help="Write binary traces")
    reproduce.add_argument("--timeout", type=float, dest="replicate_timeout", help="Per-replicate timeout (s)")
    return parser


def _experiment(args: argparse.Namespace) -> ExperimentConfig:
    raw = load_config_file(args.config) if getattr(args, "config", None) else {}
    keys = (
        CONF_SERIES,
        CONF_TICKS,
        CONF_SEED,
        CONF_MODE,
        CONF_DISCARD,
        CONF_TRUNCATE,
        CONF_WORKERS,
        CONF_OCTAVES,
        CONF_ORDER,
        CONF_REPLICATES,
        CONF_DIR,
        CONF_DUMP_TRACES,
        CONF_TIMEOUT,
    )
    overrides = {key: getattr(args, key) for key in keys if hasattr(args, key)}
    return build_experiment(raw, overrides)


def cmd_simulate(args: argparse.Namespace) -> int:
    """Synthesize one trace with the master seed and write it."""
    config = _experiment(args)
    trace = synthesize(
        config.sess,
        config.oo,
        config.n_ticks,
        config.mode,
        config.seed,
        discard=config.discard,
        truncate=config.truncate,
        workers=config.workers,
    )
    path = trace.to_csv(args.out) if args.out.suffix == ".csv" else trace.to_binary(args.out)
    LOGGER.info("Wrote %d ticks from %d sessions to %s", trace.n_ticks, trace.meta["n_sessions"], path)
    return EXIT_OK


def cmd_estimate(args: argparse.Namespace) -> int:
    """Estimate H from a stored trace."""
    if args.trace.suffix == ".csv":
        if args.mu_w is None:
            msg = "CSV traces need --mu-w"
            raise ConfigError(msg)
        trace = Trace.from_csv(args.trace, args.mu_w)
    else:
        trace = Trace.from_binary(args.trace, args.mu_w)
    order = args.order or DEFAULT_WAVELET_ORDER
    diagram = dwt_logscale(trace.c, order)
    if args.octaves:
        j1, j2 = octave_range(args.octaves)
    else:
        j2 = min(trace.n_ticks.bit_length() - 3, deepest_octave(trace.n_ticks, order))
        j1 = max(1, j2 - 6)
        LOGGER.warning("No --octaves given, regressing over %d:%d", j1, j2)
    if args.diagram:
        diagram.to_csv(args.diagram)
    _emit(estimate_hurst(diagram, j1, j2).as_dict())
    return EXIT_OK


def cmd_theory(args: argparse.Namespace) -> int:
    """Print the theory report; unsupported regions exit with a distinct code."""
    if args.alpha_min is not None or args.alpha_sess is not None:
        if args.alpha_min is None or args.alpha_sess is None:
            msg = "--alpha-min and --alpha-sess must be given together"
            raise ConfigError(msg)
        report = theory_report_from_indices(args.alpha_min, args.alpha_sess)
    else:
        config = _experiment(args)
        try:
            report = hurst_formulas(config.oo, config.sess)
        except UnsupportedCaseError as err:
            LOGGER.warning("%s", err)
            report = theory_report_from_indices(config.oo.alpha_min, config.sess.lifetime.alpha)
    _emit(report.as_dict())
    if args.out:
        report.to_json(args.out)
    return EXIT_OK if report.classification.supported else EXIT_UNSUPPORTED_CASE


def cmd_reproduce(args: argparse.Namespace) -> int:
    """Run every replicate of an experiment."""
    config = _experiment(args)
    report = run(config)
    _emit(report.summary.as_dict())
    if report.summary.n_ok == 0:
        msg = "Every replicate failed"
        raise ReplicateError(msg)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "theory": cmd_theory,
    "reproduce": cmd_reproduce,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose, args.quiet)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, InvalidParameterError, vol.Invalid) as err:
        LOGGER.error("Invalid configuration: %s", err)
        return EXIT_INVALID_CONFIG
    except UnsupportedCaseError as err:
        LOGGER.error("%s", err)
        return EXIT_UNSUPPORTED_CASE
    except HybridBurstError as err:
        LOGGER.error("%s: %s", type(err).__name__, err)
        return EXIT_RUNTIME_FAILURE

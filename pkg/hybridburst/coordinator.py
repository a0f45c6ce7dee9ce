"""Replicate orchestration for reproduction runs."""

from __future__ import annotations

import asyncio
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from pathlib import Path

import async_timeout

from .const import LOGGER, LOGSCALE_FILE, REPORT_FILE, TRACE_FILE
from .data import ExperimentConfig, ReplicateResult, ReplicateStatus, RunReport
from .exceptions import HybridBurstError, UnsupportedCaseError
from .helpers import worker_count
from .scaling import TheoryReport, hurst_formulas, theory_report_from_indices
from .wavelet import dwt_logscale, estimate_hurst
from .workload import synthesize


def run_replicate(config: ExperimentConfig, index: int, threads: int | None = None) -> ReplicateResult:
    """
    Synthesize, analyse and estimate one replicate.

    Runs in a worker process, so it only takes picklable arguments and
    writes its own per-replicate files.

    Args:
        config: Experiment configuration
        index: Replicate number (0-based)
        threads: Threads for on-off sampling inside the replicate

    Returns:
        Successful ReplicateResult

    """
    seed = config.replicate_seed(index)
    trace = synthesize(
        config.sess,
        config.oo,
        config.n_ticks,
        config.mode,
        seed,
        discard=config.discard,
        truncate=config.truncate,
        workers=threads,
    )
    diagram = dwt_logscale(trace.c, config.wavelet_order)
    j1, j2 = config.octave_range
    estimate = estimate_hurst(diagram, j1, j2)
    if config.output_dir is not None:
        out = Path(config.output_dir)
        diagram.to_csv(out / LOGSCALE_FILE.format(index=index))
        if config.dump_traces:
            trace.to_binary(out / TRACE_FILE.format(index=index))
    return ReplicateResult(
        index=index,
        seed=seed,
        status=ReplicateStatus.OK,
        estimate=estimate,
        n_sessions=int(trace.meta["n_sessions"]),
    )


def theory_for(config: ExperimentConfig) -> TheoryReport:
    """Theory report for a configuration, reduced to the Hurst triple outside the supported cases."""
    try:
        return hurst_formulas(config.oo, config.sess)
    except UnsupportedCaseError as err:
        LOGGER.warning("%s", err)
        return theory_report_from_indices(config.oo.alpha_min, config.sess.lifetime.alpha)


class ReproductionCoordinator:
    """Run the replicates of one experiment and assemble the report."""

    def __init__(self, config: ExperimentConfig, *, compute_theory: bool = True) -> None:
        """Initialize the coordinator."""
        self.config = config
        self.compute_theory = compute_theory
        total = worker_count(config.workers, LOGGER)
        self._processes = min(total, config.replicates)
        self._threads = max(1, total // self._processes)
        self._semaphore = asyncio.Semaphore(self._processes)

    def _executor(self) -> Executor:
        if self._processes > 1:
            return ProcessPoolExecutor(max_workers=self._processes)
        return ThreadPoolExecutor(max_workers=1, thread_name_prefix="replicate")

    async def _run_one(self, executor: Executor, index: int) -> ReplicateResult:
        seed = self.config.replicate_seed(index)
        loop = asyncio.get_running_loop()
        async with self._semaphore:
            LOGGER.info("Replicate %d/%d started (seed %d)", index + 1, self.config.replicates, seed)
            try:
                async with async_timeout.timeout(self.config.replicate_timeout):
                    result = await loop.run_in_executor(executor, run_replicate, self.config, index, self._threads)
            except TimeoutError:
                LOGGER.warning("Replicate %d timed out after %.0fs", index, self.config.replicate_timeout)
                return ReplicateResult(
                    index=index,
                    seed=seed,
                    status=ReplicateStatus.TIMEOUT,
                    error=f"timed out after {self.config.replicate_timeout}s",
                )
            except HybridBurstError as exception:
                LOGGER.warning("Replicate %d failed: %s", index, exception)
                return ReplicateResult(
                    index=index,
                    seed=seed,
                    status=ReplicateStatus.FAILED,
                    error=f"{type(exception).__name__}: {exception}",
                )
            except Exception as exception:  # noqa: BLE001
                LOGGER.warning("Replicate %d failed unexpectedly: %r", index, exception)
                return ReplicateResult(
                    index=index,
                    seed=seed,
                    status=ReplicateStatus.FAILED,
                    error=f"{type(exception).__name__}: {exception}",
                )
        LOGGER.info(
            "Replicate %d done: H=%.4f [%.4f, %.4f] from %d sessions",
            index,
            result.estimate.h,
            result.estimate.ci_low,
            result.estimate.ci_high,
            result.n_sessions,
        )
        return result

    async def async_run(self) -> RunReport:
        """
        Run every replicate and write the report.

        Failed or timed-out replicates keep a failure marker in the report.

        """
        config = self.config
        LOGGER.info(
            "====== STARTING RUN: %d replicates of %d ticks (%d processes x %d threads) ======",
            config.replicates,
            config.n_ticks,
            self._processes,
            self._threads,
        )
        loop = asyncio.get_running_loop()
        theory_task = loop.run_in_executor(None, theory_for, config) if self.compute_theory else None

        executor = self._executor()
        try:
            results = await asyncio.gather(*(self._run_one(executor, i) for i in range(config.replicates)))
        finally:
            executor.shutdown(wait=False, cancel_futures=True)
        theory = await theory_task if theory_task is not None else None

        report = RunReport.assemble(config, list(results), theory)
        summary = report.summary
        LOGGER.info(
            "====== RUN FINISHED: %d ok, %d failed, mean H %s (theory %s) ======",
            summary.n_ok,
            summary.n_failed,
            "n/a" if summary.mean_h is None else f"{summary.mean_h:.4f}",
            "n/a" if summary.theoretical_h is None else f"{summary.theoretical_h:.4f}",
        )
        if config.output_dir is not None:
            path = report.to_json(Path(config.output_dir) / REPORT_FILE)
            LOGGER.info("Report written to %s", path)
        return report


def run(config: ExperimentConfig, *, compute_theory: bool = True) -> RunReport:
    """Run an experiment synchronously."""
    return asyncio.run(ReproductionCoordinator(config, compute_theory=compute_theory).async_run())

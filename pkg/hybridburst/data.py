"""Experiment configuration and run report types for hybridburst."""

from __future__ import annotations

import hashlib
import json
import platform
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np
import pywt
import scipy

from .const import (
    DEFAULT_REPLICATES,
    DEFAULT_SEED,
    DEFAULT_TICKS,
    DEFAULT_WAVELET_ORDER,
    MIN_REGRESSION_OCTAVES,
    STATUS_FAILED,
    STATUS_OK,
    STATUS_TIMEOUT,
    STREAM_REPLICATE,
    VERSION,
)
from .exceptions import ConfigError, ReplicateError
from .helpers import derive_seed, write_json_atomic
from .onoff import OnOffParams
from .scaling import TheoryReport
from .sessions import GenerationMode, SessionParams
from .wavelet import HurstEstimate, deepest_octave

if TYPE_CHECKING:
    import os


class ReplicateStatus(str, Enum):
    """Outcome of one replicate."""

    OK = STATUS_OK
    FAILED = STATUS_FAILED
    TIMEOUT = STATUS_TIMEOUT


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one experiment series."""

    sess: SessionParams
    oo: OnOffParams
    n_ticks: int = DEFAULT_TICKS
    replicates: int = DEFAULT_REPLICATES
    seed: int = DEFAULT_SEED
    octave_range: tuple[int, int] = (1, 3)
    wavelet_order: int = DEFAULT_WAVELET_ORDER
    mode: GenerationMode = GenerationMode.EXACT
    discard: float | None = None
    truncate: bool = False
    series: int | None = None
    output_dir: Path | None = None
    dump_traces: bool = False
    replicate_timeout: float | None = None
    workers: int | None = None

    def __post_init__(self) -> None:
        """Check the run-level invariants."""
        if self.replicates < 1:
            msg = f"At least one replicate is required, got {self.replicates}"
            raise ConfigError(msg)
        if self.n_ticks < 1:
            msg = f"At least one tick is required, got {self.n_ticks}"
            raise ConfigError(msg)
        j1, j2 = self.octave_range
        deepest = deepest_octave(self.n_ticks, self.wavelet_order)
        if j1 < 1 or j2 > deepest or j2 - j1 + 1 < MIN_REGRESSION_OCTAVES:
            msg = (
                f"Octave range {j1}:{j2} is not valid for {self.n_ticks} ticks "
                f"(usable octaves 1..{deepest}, at least {MIN_REGRESSION_OCTAVES} needed)"
            )
            raise ConfigError(msg)

    def replicate_seed(self, index: int) -> int:
        """Master seed of replicate `index`."""
        return derive_seed(self.seed, STREAM_REPLICATE, index)

    def with_overrides(self, **changes: Any) -> ExperimentConfig:
        """Return a copy with some fields replaced (validated again)."""
        return replace(self, **changes)

    def as_dict(self) -> dict[str, Any]:
        """Return the JSON form."""
        return {
            "sessions": self.sess.as_dict(),
            "onoff": self.oo.as_dict(),
            "n_ticks": self.n_ticks,
            "replicates": self.replicates,
            "seed": self.seed,
            "octave_range": list(self.octave_range),
            "wavelet_order": self.wavelet_order,
            "mode": self.mode.value,
            "discard": self.discard,
            "truncate": self.truncate,
            "series": self.series,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentConfig:
        """Rebuild a configuration from its JSON form."""
        sess = data["sessions"]
        oo = data["onoff"]
        return cls(
            sess=SessionParams.from_means(sess["rate"], sess["alpha"], sess["mean"]),
            oo=OnOffParams.from_means(oo["alpha_on"], oo["mean_on"], oo["alpha_off"], oo["mean_off"]),
            n_ticks=int(data["n_ticks"]),
            replicates=int(data["replicates"]),
            seed=int(data["seed"]),
            octave_range=(int(data["octave_range"][0]), int(data["octave_range"][1])),
            wavelet_order=int(data["wavelet_order"]),
            mode=GenerationMode(data["mode"]),
            discard=data.get("discard"),
            truncate=bool(data.get("truncate", False)),
            series=data.get("series"),
        )

    @property
    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form (output settings excluded)."""
        canonical = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


@dataclass(frozen=True)
class ReplicateResult:
    """Outcome of one replicate; failed replicates keep their marker and message."""

    index: int
    seed: int
    status: ReplicateStatus
    estimate: HurstEstimate | None = None
    n_sessions: int | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        """True for a successful replicate."""
        return self.status is ReplicateStatus.OK

    def as_dict(self) -> dict[str, Any]:
        """Return the JSON form."""
        return {
            "index": self.index,
            "seed": self.seed,
            "status": self.status.value,
            "estimate": self.estimate.as_dict() if self.estimate else None,
            "n_sessions": self.n_sessions,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ReplicateResult:
        """Rebuild a result from its JSON form."""
        estimate = data.get("estimate")
        return cls(
            index=data["index"],
            seed=data["seed"],
            status=ReplicateStatus(data["status"]),
            estimate=HurstEstimate.from_dict(estimate) if estimate else None,
            n_sessions=data.get("n_sessions"),
            error=data.get("error"),
        )


@dataclass(frozen=True)
class RunSummary:
    """Replicate statistics against the theoretical Hurst exponent."""

    n_ok: int
    n_failed: int
    mean_h: float | None
    std_h: float | None
    theoretical_h: float | None
    ci_covered: int

    @classmethod
    def from_results(cls, results: list[ReplicateResult], theoretical_h: float | None) -> RunSummary:
        """Summarize the successful replicates."""
        estimates = [r.estimate for r in results if r.ok and r.estimate is not None]
        values = np.array([e.h for e in estimates])
        covered = 0 if theoretical_h is None else sum(e.covers(theoretical_h) for e in estimates)
        return cls(
            n_ok=len(estimates),
            n_failed=len(results) - len(estimates),
            mean_h=float(values.mean()) if values.size else None,
            std_h=float(values.std(ddof=1)) if values.size > 1 else None,
            theoretical_h=theoretical_h,
            ci_covered=int(covered),
        )

    def as_dict(self) -> dict[str, Any]:
        """Return the JSON form."""
        return {
            "n_ok": self.n_ok,
            "n_failed": self.n_failed,
            "mean_h": self.mean_h,
            "std_h": self.std_h,
            "theoretical_h": self.theoretical_h,
            "ci_covered": self.ci_covered,
        }


def package_versions() -> dict[str, str]:
    """Versions that can change the numbers in a report."""
    return {
        "hybridburst": VERSION,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pywavelets": pywt.__version__,
        "python": platform.python_version(),
    }


@dataclass(frozen=True)
class RunReport:
    """Per-replicate estimates, the theory they are compared with, and provenance."""

    config: dict[str, Any]
    replicates: list[ReplicateResult]
    theory: TheoryReport | None
    summary: RunSummary
    provenance: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def assemble(
        cls,
        config: ExperimentConfig,
        results: list[ReplicateResult],
        theory: TheoryReport | None,
    ) -> RunReport:
        """
        Build the report of a finished run.

        Raises:
            ReplicateError: If estimates disagree on octave range or wavelet order

        """
        results = sorted(results, key=lambda r: r.index)
        settings = {(r.estimate.j1, r.estimate.j2, r.estimate.wavelet_order) for r in results if r.estimate}
        if len(settings) > 1:
            msg = f"Replicate estimates use different regression settings: {sorted(settings)}"
            raise ReplicateError(msg)
        theoretical_h = theory.h_hybrid if theory is not None else None
        provenance = {
            "config_hash": config.config_hash,
            "seed": config.seed,
            "replicate_seeds": [r.seed for r in results],
            "versions": package_versions(),
        }
        return cls(
            config=config.as_dict(),
            replicates=results,
            theory=theory,
            summary=RunSummary.from_results(results, theoretical_h),
            provenance=provenance,
        )

    @property
    def mean_h(self) -> float | None:
        """Mean estimate over successful replicates."""
        return self.summary.mean_h

    def as_dict(self) -> dict[str, Any]:
        """Return the JSON form."""
        return {
            "config": self.config,
            "replicates": [r.as_dict() for r in self.replicates],
            "theory": self.theory.as_dict() if self.theory is not None else None,
            "summary": self.summary.as_dict(),
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunReport:
        """Rebuild a report from its JSON form."""
        theory = data.get("theory")
        return cls(
            config=data["config"],
            replicates=[ReplicateResult.from_dict(r) for r in data["replicates"]],
            theory=TheoryReport.from_dict(theory) if theory else None,
            summary=RunSummary(**data["summary"]),
            provenance=data.get("provenance", {}),
        )

    def to_json(self, path: str | os.PathLike[str]) -> Path:
        """Atomically write the report."""
        return write_json_atomic(path, self.as_dict())

    @classmethod
    def from_json(cls, path: str | os.PathLike[str]) -> RunReport:
        """Read a report written by to_json."""
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

"""Exceptions raised by hybridburst."""

from __future__ import annotations


class HybridBurstError(Exception):
    """Exception to indicate a general hybridburst error."""


class InvalidParameterError(HybridBurstError, ValueError):
    """Exception to indicate an invalid model parameter."""


class DomainError(InvalidParameterError):
    """Exception to indicate tail indices outside the classified domain."""


class GridTooCoarseError(InvalidParameterError):
    """Exception to indicate a renewal grid step that skips the support onset."""


class TailFitError(HybridBurstError):
    """Exception to indicate the autocovariance tail could not be fitted."""


class SessionBudgetError(HybridBurstError):
    """Exception to indicate the expected live session count exceeds the budget."""


class UnsupportedCaseError(HybridBurstError):
    """Exception to indicate a parameter region without an implemented limit law."""


class NonConvergenceError(HybridBurstError):
    """Exception to indicate a quadrature whose tail dominates the head."""


class SeriesTooShortError(HybridBurstError):
    """Exception to indicate a series too short for the wavelet transform."""


class InvalidWaveletOrderError(InvalidParameterError):
    """Exception to indicate an unsupported Daubechies order."""


class InsufficientOctavesError(HybridBurstError):
    """Exception to indicate too few octaves for the regression."""


class DegenerateDiagramError(InsufficientOctavesError):
    """Exception to indicate a diagram with vanishing detail energy."""


class EmbeddingError(HybridBurstError):
    """Exception to indicate a circulant embedding with negative eigenvalues."""


class UnknownSeriesError(InvalidParameterError):
    """Exception to indicate an unknown reproduction preset."""


class ConfigError(HybridBurstError):
    """Exception to indicate an invalid experiment configuration."""


class TraceFormatError(HybridBurstError):
    """Exception to indicate a malformed trace or session file."""


class ReplicateError(HybridBurstError):
    """Exception to indicate a failed or timed-out replicate."""

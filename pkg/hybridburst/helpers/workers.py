"""Helper module for sizing worker pools."""

from __future__ import annotations

import os
from typing import Any

from .const import ENV_THREADS


def worker_count(requested: int | None = None, logger: Any | None = None) -> int:
    """
    Return how many workers a pool may use.

    Args:
        requested: Explicit worker count, or None for one per CPU
        logger: Optional logger for an ignored environment value

    Returns:
        At least 1, at most the HYBRIDBURST_THREADS cap when it is set

    """
    count = requested if requested is not None else (os.cpu_count() or 1)
    raw = os.environ.get(ENV_THREADS)
    if raw:
        try:
            cap = int(raw)
        except ValueError:
            cap = 0
        if cap >= 1:
            count = min(count, cap)
        elif logger is not None:
            logger.warning("Ignoring %s=%r (expected a positive integer)", ENV_THREADS, raw)
    return max(1, count)

"""Helper module for atomic file output and CSV tables."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np

from ..exceptions import TraceFormatError
from .const import CSV_DELIMITER, CSV_FLOAT_FORMAT, TEMP_SUFFIX

if TYPE_CHECKING:
    from collections.abc import Callable, Mapping


def _atomic_write(path: str | os.PathLike[str], writer: Callable[[Path], None]) -> Path:
    """Write through a temporary file in the target directory, then rename it into place."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=TEMP_SUFFIX, dir=target.parent)
    os.close(fd)
    tmp = Path(tmp_name)
    try:
        writer(tmp)
        tmp.replace(target)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise
    return target


def write_text_atomic(path: str | os.PathLike[str], text: str) -> Path:
    """Atomically write a text file."""
    return _atomic_write(path, lambda tmp: tmp.write_text(text, encoding="utf-8"))


def write_bytes_atomic(path: str | os.PathLike[str], payload: bytes) -> Path:
    """Atomically write a binary file."""
    return _atomic_write(path, lambda tmp: tmp.write_bytes(payload))


def write_json_atomic(path: str | os.PathLike[str], data: Mapping[str, Any]) -> Path:
    """Atomically write a JSON document with stable key order."""
    return write_text_atomic(path, json.dumps(data, indent=2, sort_keys=True) + "\n")


def write_csv(
    path: str | os.PathLike[str],
    columns: Mapping[str, np.ndarray],
    formats: Mapping[str, str] | None = None,
) -> Path:
    """
    Atomically write equal-length columns as a CSV table with a header row.

    Args:
        path: Output file
        columns: Column name to 1-D array, in output order
        formats: Optional printf format per column (integers default to %d)

    Returns:
        The written path

    """
    names = list(columns)
    arrays = [np.asarray(columns[name]) for name in names]
    formats = dict(formats or {})
    fmt = [
        formats.get(name, "%d" if np.issubdtype(arr.dtype, np.integer) else CSV_FLOAT_FORMAT)
        for name, arr in zip(names, arrays, strict=True)
    ]
    table = np.column_stack(arrays) if arrays and arrays[0].size else np.empty((0, len(names)))

    def _write(tmp: Path) -> None:
        np.savetxt(tmp, table, fmt=fmt, delimiter=CSV_DELIMITER, header=CSV_DELIMITER.join(names), comments="")

    return _atomic_write(path, _write)


def read_csv(path: str | os.PathLike[str]) -> dict[str, np.ndarray]:
    """
    Read a CSV table written by write_csv into float columns keyed by header name.

    Raises:
        TraceFormatError: If the file cannot be read or is not a numeric table

    """
    try:
        with Path(path).open(encoding="utf-8") as handle:
            header = handle.readline().strip()
        table = np.loadtxt(path, delimiter=CSV_DELIMITER, skiprows=1, ndmin=2)
    except (OSError, ValueError) as err:
        msg = f"Cannot read CSV table {path} - {err}"
        raise TraceFormatError(msg) from err
    names = header.split(CSV_DELIMITER)
    if table.size and table.shape[1] != len(names):
        msg = f"{path} has {table.shape[1]} columns but {len(names)} header names"
        raise TraceFormatError(msg)
    if table.size == 0:
        return {name: np.empty(0) for name in names}
    return {name: table[:, i] for i, name in enumerate(names)}

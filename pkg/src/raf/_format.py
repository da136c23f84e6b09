"""Deterministic text rendering of floats for CSV and CLI output."""
from __future__ import annotations

from typing import Iterable


def fmt_float(x: float) -> str:
    """Shortest decimal that round-trips to the same double."""
    return repr(float(x))


def fmt_series(values: Iterable[float]) -> str:
    """Compact bracketed rendering for terminal output, e.g. [9,9]."""
    return "[" + ",".join(f"{float(v):.6g}" for v in values) + "]"

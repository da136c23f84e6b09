"""JSON-Lines dataset ingestion.

One series per line: {"id": text, "freq": text, "values": [reals or
nulls]}. Nulls mark missing observations and load as NaN. The format is
deliberately strict; anything surprising is an error with a line number,
not a silent coercion.
"""
from __future__ import annotations

import json
import math
import os
from typing import Iterable, Sequence

from .errors import DuplicateId, EmptySeries, ParseError
from .series import TimeSeries


def _reject_constant(token: str):
    raise ValueError(f"non-finite JSON token {token!r}")


def _check_values(raw, line_no: int, series_id: str) -> list[float]:
    if not isinstance(raw, list):
        raise ParseError(line_no, f"series {series_id!r}: 'values' must be an array")
    out = []
    for pos, v in enumerate(raw):
        if v is None:
            out.append(math.nan)
        elif isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ParseError(
                line_no,
                f"series {series_id!r}: values[{pos}] is {type(v).__name__}, "
                "expected a number or null",
            )
        else:
            out.append(float(v))
    return out


def load_dataset(path) -> list[TimeSeries]:
    """Read a JSON-Lines dataset file; order preserved, ids unique."""
    result: list[TimeSeries] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line, parse_constant=_reject_constant)
            except ValueError as exc:
                raise ParseError(line_no, str(exc)) from None
            if not isinstance(record, dict):
                raise ParseError(line_no, "record is not a JSON object")
            series_id = record.get("id")
            freq = record.get("freq")
            if not isinstance(series_id, str) or not series_id:
                raise ParseError(line_no, "'id' must be a non-empty string")
            if not isinstance(freq, str) or not freq:
                raise ParseError(line_no, "'freq' must be a non-empty string")
            unknown = set(record) - {"id", "freq", "values"}
            if unknown:
                raise ParseError(line_no, f"unknown keys {sorted(unknown)}")
            values = _check_values(record.get("values"), line_no, series_id)
            if not values:
                raise EmptySeries(f"series {series_id!r} (line {line_no}) has no values")
            if series_id in seen:
                raise DuplicateId(f"series id {series_id!r} appears more than once")
            seen.add(series_id)
            result.append(TimeSeries(id=series_id, freq=freq, values=values))
    return result


def write_dataset(series: Iterable[TimeSeries], path) -> None:
    """Emit series as JSON-Lines, NaN rendered as null."""
    with open(path, "w", encoding="utf-8") as fh:
        for ts in series:
            values = [None if math.isnan(v) else float(v) for v in ts.values]
            fh.write(
                json.dumps(
                    {"id": ts.id, "freq": ts.freq, "values": values},
                    allow_nan=False,
                )
                + "\n"
            )


def load_datasets(paths: Sequence) -> dict[str, list[TimeSeries]]:
    """Load several dataset files keyed by file stem."""
    out: dict[str, list[TimeSeries]] = {}
    for path in paths:
        stem = os.path.splitext(os.path.basename(str(path)))[0]
        if stem in out:
            raise DuplicateId(f"two dataset files share the stem {stem!r}")
        out[stem] = load_dataset(path)
    return out

#!/usr/bin/env python3
"""Convert a .tsf archive file to the JSON-Lines dataset format.

The .tsf layout: "#" comment lines, "@attribute <name> <type>" metadata
declarations, "@frequency <freq>", then "@data" followed by one series
per line. Data fields are colon-separated, one per declared attribute,
with the comma-separated values last; "?" marks a missing value.

Only the subset needed for ingestion is handled: series ids come from
the series_name attribute (falling back to T1, T2, ... when absent),
the declared frequency becomes each series' freq unless --freq
overrides it, and "?" becomes null. Other attributes (start timestamps
and the like) are dropped.

Usage: python3 scripts/tsf_to_jsonl.py input.tsf output.jsonl [--freq daily]
"""
import argparse
import math
import sys

import numpy as np

from raf import TimeSeries, write_dataset


def parse_tsf(lines, freq_override=None):
    attributes = []
    frequency = None
    in_data = False
    records = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not in_data:
            lowered = line.lower()
            if lowered.startswith("@attribute"):
                parts = line.split()
                if len(parts) < 3:
                    raise ValueError(f"line {lineno}: malformed @attribute")
                attributes.append(parts[1])
            elif lowered.startswith("@frequency"):
                parts = line.split()
                if len(parts) >= 2:
                    frequency = parts[1]
            elif lowered.startswith("@data"):
                in_data = True
            # other @ headers (@relation, @horizon, @missing, ...) are metadata only
            continue
        fields = line.split(":")
        if len(fields) != len(attributes) + 1:
            raise ValueError(
                f"line {lineno}: expected {len(attributes) + 1} colon-separated "
                f"fields for {len(attributes)} attributes, got {len(fields)}"
            )
        records.append((lineno, fields))
    if not in_data:
        raise ValueError("no @data section found")
    if not records:
        raise ValueError("no series after @data")

    freq = freq_override or frequency or "any"
    try:
        name_idx = attributes.index("series_name")
    except ValueError:
        name_idx = None

    out = []
    seen = set()
    for n, (lineno, fields) in enumerate(records, start=1):
        sid = fields[name_idx] if name_idx is not None else f"T{n}"
        if sid in seen:
            raise ValueError(f"line {lineno}: duplicate series id {sid!r}")
        seen.add(sid)
        tokens = [t for t in fields[-1].split(",") if t != ""]
        if not tokens:
            raise ValueError(f"line {lineno}: series {sid!r} has no values")
        values = np.empty(len(tokens))
        for i, tok in enumerate(tokens):
            if tok == "?":
                values[i] = math.nan
            else:
                try:
                    values[i] = float(tok)
                except ValueError:
                    raise ValueError(
                        f"line {lineno}: series {sid!r} value {i} is not "
                        f"a number or '?': {tok!r}"
                    ) from None
        out.append(TimeSeries(id=sid, values=values, freq=freq))
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("input", help=".tsf file to read")
    parser.add_argument("output", help="JSON-Lines file to write")
    parser.add_argument("--freq", help="override the declared frequency")
    args = parser.parse_args(argv)
    try:
        with open(args.input) as fh:
            dataset = parse_tsf(fh, freq_override=args.freq)
    except FileNotFoundError:
        print(f"error: {args.input}: no such file", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {args.input}: {exc}", file=sys.stderr)
        return 1
    write_dataset(dataset, args.output)
    print(f"wrote {len(dataset)} series -> {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

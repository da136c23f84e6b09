"""Command-line surface.

Subcommands: index (build + snapshot a window index), retrieve (top-n
inspection), forecast (one query end-to-end), bench (full benchmark run
with CSV output), synth (SNR sweep), tsr (attention-construction demo).

Exit codes: 0 success, 1 invalid input or usage, 2 runtime failure.
The RAF_ADAPTER environment variable supplies the adapter command when
--adapter is not given.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from ._format import fmt_series
from .bench import (
    BenchConfig,
    _forecast_baseline,
    _forecast_raf,
    aggregate,
    format_summary,
    run_benchmark,
    write_aggregate_csv,
    write_cells_csv,
)
from .datasets import load_dataset
from .errors import ConfigError, InputError, RafError
from .forecasters import make_forecaster, point_forecast
from .retrieval import build_index, load_index, save_index, split_dataset, top_n
from .series import instance_normalize
from .synth import SynthConfig, snr_sweep, write_sweep_csv
from .tsr import solve_tsr


def _parse_series(text: str) -> np.ndarray:
    try:
        values = np.array([float(tok) for tok in text.replace(" ", "").split(",") if tok])
    except ValueError:
        raise ConfigError(f"--series must be comma-separated numbers, got {text!r}") from None
    if values.size == 0:
        raise ConfigError("--series is empty")
    return values


def _adapter_command(args) -> str | None:
    cmd = getattr(args, "adapter", None)
    return cmd or os.environ.get("RAF_ADAPTER") or None


def _load_toml(path) -> dict:
    if sys.version_info >= (3, 11):
        import tomllib
    else:
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _cmd_index(args) -> int:
    series = load_dataset(args.data)
    if args.no_split:
        database = series
        split_note = "all series"
    else:
        database, _ = split_dataset(series, args.test_fraction, args.seed)
        split_note = f"database side of a {args.test_fraction:g}/{args.seed} split"
    embedder = None
    adapter_cmd = _adapter_command(args)
    client = None
    if adapter_cmd:
        from .adapter import AdapterClient

        client = AdapterClient(adapter_cmd)
        if "embed" in client.capabilities:
            embedder = client.embed
        else:
            print("adapter has no embed capability; using identity embeddings")
    try:
        index = build_index(
            database, args.c, args.h, stride=args.stride, embedder=embedder
        )
    finally:
        if client is not None:
            client.close()
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "index.npz")
    save_index(index, path)
    print(
        f"indexed {len(index)} windows (C={args.c}, H={args.h}, "
        f"stride={args.stride}) from {len(database)} series ({split_note}) -> {path}"
    )
    return 0


def _cmd_retrieve(args) -> int:
    index = load_index(args.index)
    context = _parse_series(args.series)
    normalized, _ = instance_normalize(context)
    matches = top_n(normalized, index, args.n)
    for rank, match in enumerate(matches, start=1):
        print(
            f"{rank}. id={match.series_id} offset={match.offset} "
            f"distance={match.distance:.6g}"
        )
    return 0


def _cmd_forecast(args) -> int:
    context = _parse_series(args.series)
    forecaster = make_forecaster(
        args.forecaster,
        seasonality=args.seasonality,
        adapter_command=_adapter_command(args),
    )
    try:
        if args.method == "raf":
            if not args.index:
                raise ConfigError("method 'raf' needs --index")
            index = load_index(args.index)
            samples = _forecast_raf(context, args.h, forecaster, args.num_samples, index)
        else:
            samples = _forecast_baseline(context, args.h, forecaster, args.num_samples)
    finally:
        close = getattr(forecaster, "close", None)
        if close is not None:
            close()
    print(fmt_series(point_forecast(samples)))
    return 0


def _cmd_bench(args) -> int:
    overrides = {}
    if args.seed is not None:
        overrides["split_seed"] = args.seed
    if args.stride is not None:
        overrides["stride"] = args.stride
    adapter_cmd = _adapter_command(args)
    if adapter_cmd:
        overrides["forecaster"] = "adapter"
        overrides["adapter_command"] = adapter_cmd
    config = BenchConfig.from_toml(args.config, **overrides)
    table = run_benchmark(config, workers=args.workers)
    report = aggregate(table)
    cell_paths = write_cells_csv(table, args.out)
    agg_path = write_aggregate_csv(report, args.out)
    summary = format_summary(table, report)
    summary_path = os.path.join(args.out, "summary.txt")
    with open(summary_path, "w") as fh:
        fh.write(summary)
    sys.stdout.write(summary)
    for path in [*cell_paths, agg_path, summary_path]:
        print(f"wrote {path}")
    return 0


def _cmd_synth(args) -> int:
    raw = _load_toml(args.config) if args.config else {}
    unknown = set(raw) - {
        "context_len",
        "horizon",
        "f1",
        "f2",
        "phase",
        "sigma",
        "seed",
        "num_instances",
        "num_model_samples",
        "rotation_mode",
        "snr_grid",
        "forecaster",
        "seasonality",
    }
    if unknown:
        raise ConfigError(f"{args.config}: unknown config keys {sorted(unknown)}")
    snr_grid = raw.pop("snr_grid", [0.1, 1.0, 10.0, 100.0])
    forecaster_spec = raw.pop("forecaster", "retrieval-copy")
    seasonality = raw.pop("seasonality", 1)
    defaults = dict(
        context_len=24,
        horizon=8,
        f1=0.05,
        f2=0.13,
        phase=0.0,
        sigma=0.0,
        seed=0,
        num_instances=200,
    )
    defaults.update(raw)
    if args.seed is not None:
        defaults["seed"] = args.seed
    config = SynthConfig(**defaults)
    forecaster = make_forecaster(
        forecaster_spec,
        seasonality=seasonality,
        adapter_command=_adapter_command(args),
    )
    try:
        points = snr_sweep(config, forecaster, snr_grid)
    finally:
        close = getattr(forecaster, "close", None)
        if close is not None:
            close()
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "sweep.csv")
    write_sweep_csv(points, path)
    for p in points:
        print(
            f"snr={p.snr:g} mean_scaled_mse={p.mean_scaled_mse:.6g} "
            f"stderr={p.stderr:.3g}"
        )
    print(f"wrote {path}")
    return 0


def _cmd_tsr(args) -> int:
    if args.series:
        series = _parse_series(args.series)
    else:
        rng = np.random.default_rng(args.seed if args.seed is not None else 0)
        length = int(rng.integers(32, 129))
        c = int(rng.integers(4, min(16, (length - 1) // 2) + 1))
        series = rng.uniform(-1.0, 1.0, length)
        start = int(rng.integers(0, length - 2 * c))
        series[start : start + c] = series[length - c :]
        print(f"generated series of length {length} with motif length {c}")
        print(f"motif also occurs at offset {start}; true successor "
              f"{fmt_series(series[start + c : start + 2 * c])}")
        args.c = c
    prediction = solve_tsr(series, args.c, args.scale)
    print(fmt_series(prediction))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="raf",
        description="Retrieval-augmented time-series forecasting toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build and snapshot a window index")
    p.add_argument("--data", required=True, help="JSON-Lines dataset path")
    p.add_argument("--c", type=int, required=True, help="context window length")
    p.add_argument("--h", type=int, required=True, help="future segment length")
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=42, help="split seed")
    p.add_argument("--no-split", action="store_true", help="index every series")
    p.add_argument("--adapter", help="external embedder command")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=_cmd_index)

    p = sub.add_parser("retrieve", help="inspect top-n matches for a context")
    p.add_argument("--index", required=True, help="index snapshot path")
    p.add_argument("--series", required=True, help="comma-separated context values")
    p.add_argument("--n", type=int, default=1)
    p.set_defaults(func=_cmd_retrieve)

    p = sub.add_parser("forecast", help="forecast one context end-to-end")
    p.add_argument("--series", required=True, help="comma-separated context values")
    p.add_argument("--h", type=int, required=True, help="forecast horizon")
    p.add_argument("--method", choices=("raf", "baseline"), default="baseline")
    p.add_argument("--index", help="index snapshot (required for method raf)")
    p.add_argument(
        "--forecaster",
        default="seasonal-naive",
        choices=("zero", "seasonal-naive", "retrieval-copy", "adapter"),
    )
    p.add_argument("--seasonality", type=int, default=1)
    p.add_argument("--num-samples", type=int, default=20)
    p.add_argument("--adapter", help="adapter command for --forecaster adapter")
    p.set_defaults(func=_cmd_forecast)

    p = sub.add_parser("bench", help="run benchmarks and write CSV results")
    p.add_argument("--config", required=True, help="TOML config path")
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--seed", type=int, help="override the split seed")
    p.add_argument("--stride", type=int, help="override the index stride")
    p.add_argument("--adapter", help="forecast through this adapter command")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("synth", help="run the synthetic SNR sweep")
    p.add_argument("--config", help="TOML config path (defaults used if omitted)")
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--seed", type=int, help="override the experiment seed")
    p.add_argument("--adapter", help="adapter command for forecaster = 'adapter'")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("tsr", help="solve a motif-retrieval instance by attention")
    p.add_argument("--series", help="comma-separated values")
    p.add_argument("--c", type=int, help="motif window length")
    p.add_argument("--scale", type=float, default=1e4, help="attention saturation scale")
    p.add_argument("--seed", type=int, help="seed for a generated instance")
    p.set_defaults(func=_cmd_tsr)

    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; fold into the validation code
        return 0 if exc.code == 0 else 1
    if args.command == "tsr" and not args.series and args.c is not None:
        print("error: --c only applies together with --series", file=sys.stderr)
        return 1
    if args.command == "tsr" and args.series and args.c is None:
        print("error: --series needs --c", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (InputError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RafError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())

"""Benchmark orchestration: split each dataset, score raf and baseline
forecasts over a (context length x horizon) grid, and aggregate relative
scores through geometric means.

Per test series and (C, H) the evaluation window is the last C + H
points: the first C are the context, the last H the actuals. The
baseline method normalizes the context, forecasts, and de-normalizes.
The raf method retrieves the top-1 window from the database index, forms
the augmented query, forecasts, and projects back with the original
context's stats.

Runs are RNG-free: the split is seeded, built-in forecasters are
deterministic, and cells are merged in canonical config order, so serial
and parallel execution emit byte-identical CSVs.
"""
from __future__ import annotations

import csv
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ._format import fmt_float
from .datasets import load_dataset
from .errors import (
    ConfigError,
    DegenerateScale,
    MissingBaselineCell,
    RafError,
    RuntimeFailure,
    ZeroBaseline,
)
from .forecasters import (
    Forecaster,
    ForecastRequest,
    ForecastSamples,
    forecast,
    make_forecaster,
    point_forecast,
    quantile_forecast,
)
from .metrics import (
    EvalRecord,
    geometric_mean,
    mase,
    relative_score,
    seasonality_for,
    wql,
)
from .retrieval import (
    WindowIndex,
    build_index,
    form_raf_query,
    project_forecast,
    split_dataset,
    top_n,
)
from .series import TimeSeries, denormalize, instance_normalize

METHODS = ("raf", "baseline")


@dataclass(frozen=True)
class BenchmarkSpec:
    """One named benchmark: datasets evaluated over shared (C, H) grids."""

    name: str
    dataset_paths: tuple[str, ...]
    context_grid: tuple[int, ...]
    horizon_grid: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.name:
            raise ConfigError("benchmark name must be non-empty")
        if not self.dataset_paths:
            raise ConfigError(f"benchmark {self.name!r} lists no datasets")
        if not self.context_grid or not self.horizon_grid:
            raise ConfigError(f"benchmark {self.name!r} has an empty grid")
        if any(c < 2 for c in self.context_grid):
            raise ConfigError("context lengths must be >= 2")
        if any(h < 1 for h in self.horizon_grid):
            raise ConfigError("horizons must be >= 1")


@dataclass(frozen=True)
class BenchConfig:
    benchmarks: tuple[BenchmarkSpec, ...]
    test_fraction: float = 0.2
    split_seed: int = 42
    stride: int = 1
    num_samples: int = 20
    forecaster: str = "seasonal-naive"
    seasonality: int = 1  # cycle length for the seasonal-naive forecaster
    adapter_command: str | None = None
    methods: tuple[str, ...] = METHODS
    seasonality_overrides: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.benchmarks:
            raise ConfigError("config lists no benchmarks")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError(f"test_fraction must be in (0,1), got {self.test_fraction}")
        if self.stride < 1:
            raise ConfigError(f"stride must be >= 1, got {self.stride}")
        if self.num_samples < 1:
            raise ConfigError(f"num_samples must be >= 1, got {self.num_samples}")
        if self.seasonality < 1:
            raise ConfigError(f"seasonality must be >= 1, got {self.seasonality}")
        if not self.methods:
            raise ConfigError("at least one method is required")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; choices: {METHODS}")

    @classmethod
    def from_toml(cls, path, **overrides) -> "BenchConfig":
        if sys.version_info >= (3, 11):
            import tomllib
        else:
            import tomli as tomllib
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        specs = []
        base = os.path.dirname(os.path.abspath(str(path)))
        for entry in raw.pop("benchmark", []):
            try:
                specs.append(
                    BenchmarkSpec(
                        name=entry["name"],
                        dataset_paths=tuple(
                            p if os.path.isabs(p) else os.path.join(base, p)
                            for p in entry["datasets"]
                        ),
                        context_grid=tuple(entry["context_grid"]),
                        horizon_grid=tuple(entry["horizon_grid"]),
                    )
                )
            except KeyError as exc:
                raise ConfigError(f"{path}: benchmark entry missing key {exc}") from None
        kwargs = {}
        for key in (
            "test_fraction",
            "split_seed",
            "stride",
            "num_samples",
            "forecaster",
            "seasonality",
            "adapter_command",
        ):
            if key in raw:
                kwargs[key] = raw.pop(key)
        if "methods" in raw:
            kwargs["methods"] = tuple(raw.pop("methods"))
        if "seasonality_overrides" in raw:
            kwargs["seasonality_overrides"] = dict(raw.pop("seasonality_overrides"))
        if raw:
            raise ConfigError(f"{path}: unknown config keys {sorted(raw)}")
        kwargs.update(overrides)
        return cls(benchmarks=tuple(specs), **kwargs)


@dataclass(frozen=True)
class CellFailure:
    dataset: str
    method: str
    context_len: int
    horizon: int
    reason: str


@dataclass(frozen=True)
class ResultsTable:
    """Scored cells grouped by benchmark, in canonical config order."""

    cells: Mapping[str, tuple[EvalRecord, ...]]
    failures: tuple[CellFailure, ...]
    skipped: Mapping[tuple[str, int, int], int]  # (dataset, C, H) -> series skipped


def _dataset_name(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def _context_tail(norm_context: np.ndarray, horizon: int) -> np.ndarray:
    # designated future for the retrieval-copy baseline: the last H
    # normalized context values, front-padded with the first value when
    # the context is shorter than the horizon
    if norm_context.size >= horizon:
        return norm_context[-horizon:]
    pad = np.full(horizon - norm_context.size, norm_context[0])
    return np.concatenate([pad, norm_context])


def _forecast_baseline(
    context: np.ndarray,
    horizon: int,
    forecaster: Forecaster,
    num_samples: int,
) -> ForecastSamples:
    norm_context, stats = instance_normalize(context)
    request = ForecastRequest(
        context=norm_context,
        horizon=horizon,
        num_samples=num_samples,
        auxiliary={"designated_future": _context_tail(norm_context, horizon)},
    )
    samples = forecast(forecaster, request)
    return ForecastSamples(samples=denormalize(samples.samples, stats))


def _forecast_raf(
    context: np.ndarray,
    horizon: int,
    forecaster: Forecaster,
    num_samples: int,
    index: WindowIndex,
) -> ForecastSamples:
    norm_context, _ = instance_normalize(context)
    match = top_n(norm_context, index, 1)[0]
    query = form_raf_query(context, match)
    request = ForecastRequest(
        context=query.augmented,
        horizon=horizon,
        num_samples=num_samples,
        auxiliary={"designated_future": query.retrieved_future_segment()},
    )
    samples = forecast(forecaster, request)
    return project_forecast(samples.samples, horizon, query.orig_stats)


def _score_cell(
    dataset: str,
    test_series: Sequence[TimeSeries],
    context_len: int,
    horizon: int,
    method: str,
    forecaster: Forecaster,
    config: BenchConfig,
    index: WindowIndex | None,
) -> tuple[EvalRecord | CellFailure, int]:
    """Score one (dataset, method, C, H) cell; returns (record, skipped)."""
    all_actuals: list[np.ndarray] = []
    all_quantiles = []
    mase_values: list[float] = []
    excluded = 0
    skipped = 0
    for series in test_series:
        window = context_len + horizon
        if len(series) < window or not np.isfinite(series.values[-window:]).all():
            skipped += 1
            continue
        context = series.values[-window:-horizon]
        actuals = series.values[-horizon:]
        try:
            if method == "baseline":
                projected = _forecast_baseline(
                    context, horizon, forecaster, config.num_samples
                )
            else:
                assert index is not None
                projected = _forecast_raf(
                    context, horizon, forecaster, config.num_samples, index
                )
        except RafError as exc:
            return (
                CellFailure(
                    dataset=dataset,
                    method=method,
                    context_len=context_len,
                    horizon=horizon,
                    reason=f"{series.id}: {type(exc).__name__}: {exc}",
                ),
                skipped,
            )
        all_actuals.append(actuals)
        all_quantiles.append(quantile_forecast(projected))
        m = seasonality_for(series.freq, dict(config.seasonality_overrides))
        try:
            mase_values.append(
                mase(actuals, point_forecast(projected), series.values[:-horizon], m)
            )
        except DegenerateScale:
            excluded += 1
    if not all_actuals:
        return (
            CellFailure(
                dataset=dataset,
                method=method,
                context_len=context_len,
                horizon=horizon,
                reason=f"no test series long enough for C+H={context_len + horizon}",
            ),
            skipped,
        )
    try:
        cell_wql = wql(all_actuals, all_quantiles)
    except RafError as exc:
        return (
            CellFailure(
                dataset=dataset,
                method=method,
                context_len=context_len,
                horizon=horizon,
                reason=f"{type(exc).__name__}: {exc}",
            ),
            skipped,
        )
    cell_mase = float(np.mean(mase_values)) if mase_values else None
    return (
        EvalRecord(
            dataset=dataset,
            method=method,
            context_len=context_len,
            horizon=horizon,
            wql=cell_wql,
            mase=cell_mase,
            excluded_mase_count=excluded,
        ),
        skipped,
    )


def run_benchmark(
    config: BenchConfig,
    forecaster: Forecaster | None = None,
    workers: int = 1,
) -> ResultsTable:
    """Score every (dataset, method, C, H) cell in the config.

    Per-cell failures are recorded and the run continues; a method that
    fails in every cell aborts the run with a summary of the reasons.
    """
    if forecaster is None:
        forecaster = make_forecaster(
            config.forecaster,
            seasonality=config.seasonality,
            adapter_command=config.adapter_command,
        )
    # plan all cells up front in canonical order, then score
    plans = []  # (benchmark, dataset, test, C, H, method, index or None)
    skipped: dict[tuple[str, int, int], int] = {}
    failures: list[CellFailure] = []
    for spec in config.benchmarks:
        for path in spec.dataset_paths:
            name = _dataset_name(path)
            series = load_dataset(path)
            database, test = split_dataset(
                series, config.test_fraction, config.split_seed
            )
            for context_len in spec.context_grid:
                for horizon in spec.horizon_grid:
                    index = None
                    index_error = None
                    if "raf" in config.methods:
                        try:
                            index = build_index(
                                database, context_len, horizon, stride=config.stride
                            )
                        except RafError as exc:
                            index_error = f"{type(exc).__name__}: {exc}"
                    for method in config.methods:
                        if method == "raf" and index is None:
                            failures.append(
                                CellFailure(
                                    dataset=name,
                                    method=method,
                                    context_len=context_len,
                                    horizon=horizon,
                                    reason=f"index build failed: {index_error}",
                                )
                            )
                            continue
                        plans.append(
                            (spec.name, name, test, context_len, horizon, method, index)
                        )

    def run_plan(plan):
        bench_name, name, test, context_len, horizon, method, index = plan
        outcome, cell_skipped = _score_cell(
            name, test, context_len, horizon, method, forecaster, config, index
        )
        return bench_name, name, context_len, horizon, outcome, cell_skipped

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_plan, plans))
    else:
        outcomes = [run_plan(p) for p in plans]

    cells: dict[str, list[EvalRecord]] = {spec.name: [] for spec in config.benchmarks}
    for bench_name, name, context_len, horizon, outcome, cell_skipped in outcomes:
        key = (name, context_len, horizon)
        skipped[key] = max(skipped.get(key, 0), cell_skipped)
        if isinstance(outcome, CellFailure):
            failures.append(outcome)
        else:
            cells[bench_name].append(outcome)

    scored_methods = {rec.method for recs in cells.values() for rec in recs}
    for method in config.methods:
        if method not in scored_methods:
            reasons = "; ".join(
                f"{f.dataset}/C={f.context_len}/H={f.horizon}: {f.reason}"
                for f in failures
                if f.method == method
            )
            raise RuntimeFailure(
                f"method {method!r} failed in every cell: {reasons or 'no cells planned'}"
            )
    return ResultsTable(
        cells={k: tuple(v) for k, v in cells.items()},
        failures=tuple(failures),
        skipped=skipped,
    )


@dataclass(frozen=True)
class ContextAggregate:
    benchmark: str
    dataset: str
    context_len: int
    rel_wql: float
    rel_mase: float | None


@dataclass(frozen=True)
class DatasetAggregate:
    benchmark: str
    dataset: str
    rel_wql: float
    rel_mase: float | None


@dataclass(frozen=True)
class BenchmarkAggregate:
    benchmark: str
    rel_wql: float
    rel_mase: float | None


@dataclass(frozen=True)
class AggregateReport:
    per_context: tuple[ContextAggregate, ...]
    per_dataset: tuple[DatasetAggregate, ...]
    per_benchmark: tuple[BenchmarkAggregate, ...]
    overall_wql: float
    overall_mase: float | None


def _mean_or_none(values: Sequence[float | None]) -> float | None:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None


def _gm_or_none(values: Sequence[float | None]) -> float | None:
    present = [v for v in values if v is not None]
    return geometric_mean(present) if present else None


def aggregate(table: ResultsTable) -> AggregateReport:
    """Collapse cells to relative scores: average over horizons, ratio
    raf/baseline per (dataset, C), then geometric means over C, datasets,
    and benchmarks."""
    per_context: list[ContextAggregate] = []
    per_dataset: list[DatasetAggregate] = []
    per_benchmark: list[BenchmarkAggregate] = []
    for bench_name, records in table.cells.items():
        # level 1: average over the horizon grid
        grouped: dict[tuple[str, str, int], list[EvalRecord]] = {}
        order: list[tuple[str, int]] = []
        for rec in records:
            grouped.setdefault((rec.dataset, rec.method, rec.context_len), []).append(rec)
            if (rec.dataset, rec.context_len) not in order:
                order.append((rec.dataset, rec.context_len))
        averaged = {
            key: (
                float(np.mean([r.wql for r in recs])),
                _mean_or_none([r.mase for r in recs]),
            )
            for key, recs in grouped.items()
        }
        # level 2: relative score raf / baseline per (dataset, C)
        bench_context: list[ContextAggregate] = []
        for dataset, context_len in order:
            raf_key = (dataset, "raf", context_len)
            base_key = (dataset, "baseline", context_len)
            if raf_key not in averaged:
                continue
            if base_key not in averaged:
                raise MissingBaselineCell(
                    f"{dataset} C={context_len}: raf scored but baseline missing"
                )
            raf_wql, raf_mase = averaged[raf_key]
            base_wql, base_mase = averaged[base_key]
            if base_wql == 0.0:
                raise ZeroBaseline(f"{dataset} C={context_len}: baseline WQL is zero")
            rel_mase = None
            if raf_mase is not None and base_mase is not None:
                if base_mase == 0.0:
                    raise ZeroBaseline(
                        f"{dataset} C={context_len}: baseline MASE is zero"
                    )
                rel_mase = relative_score(raf_mase, base_mase)
            bench_context.append(
                ContextAggregate(
                    benchmark=bench_name,
                    dataset=dataset,
                    context_len=context_len,
                    rel_wql=relative_score(raf_wql, base_wql),
                    rel_mase=rel_mase,
                )
            )
        per_context.extend(bench_context)
        # level 3: geometric mean over C per dataset
        bench_datasets: list[DatasetAggregate] = []
        for dataset in dict.fromkeys(a.dataset for a in bench_context):
            rows = [a for a in bench_context if a.dataset == dataset]
            bench_datasets.append(
                DatasetAggregate(
                    benchmark=bench_name,
                    dataset=dataset,
                    rel_wql=geometric_mean([a.rel_wql for a in rows]),
                    rel_mase=_gm_or_none([a.rel_mase for a in rows]),
                )
            )
        per_dataset.extend(bench_datasets)
        # level 4a: geometric mean over datasets per benchmark
        if bench_datasets:
            per_benchmark.append(
                BenchmarkAggregate(
                    benchmark=bench_name,
                    rel_wql=geometric_mean([d.rel_wql for d in bench_datasets]),
                    rel_mase=_gm_or_none([d.rel_mase for d in bench_datasets]),
                )
            )
    if not per_benchmark:
        raise MissingBaselineCell("no (dataset, C) pair has both methods scored")
    # level 4b: geometric mean over benchmarks
    overall_wql = geometric_mean([b.rel_wql for b in per_benchmark])
    overall_mase = _gm_or_none([b.rel_mase for b in per_benchmark])
    return AggregateReport(
        per_context=tuple(per_context),
        per_dataset=tuple(per_dataset),
        per_benchmark=tuple(per_benchmark),
        overall_wql=overall_wql,
        overall_mase=overall_mase,
    )


def _opt(value: float | None) -> str:
    return "" if value is None else fmt_float(value)


def write_cells_csv(table: ResultsTable, out_dir) -> list[str]:
    """One cells CSV per benchmark: cells.csv when there is a single
    benchmark, cells-<name>.csv otherwise. Returns the paths written."""
    os.makedirs(out_dir, exist_ok=True)
    names = list(table.cells)
    paths = []
    for bench_name in names:
        fname = "cells.csv" if len(names) == 1 else f"cells-{bench_name}.csv"
        path = os.path.join(out_dir, fname)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                [
                    "dataset",
                    "method",
                    "context_len",
                    "horizon",
                    "wql",
                    "mase",
                    "excluded_mase_count",
                ]
            )
            for rec in table.cells[bench_name]:
                writer.writerow(
                    [
                        rec.dataset,
                        rec.method,
                        rec.context_len,
                        rec.horizon,
                        fmt_float(rec.wql),
                        _opt(rec.mase),
                        rec.excluded_mase_count,
                    ]
                )
        paths.append(path)
    return paths


def write_aggregate_csv(report: AggregateReport, out_dir) -> str:
    """All aggregation layers in one CSV, a `level` column marking each."""
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "aggregate.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["level", "benchmark", "dataset", "context_len", "rel_wql", "rel_mase"]
        )
        for a in report.per_context:
            writer.writerow(
                [
                    "per-context",
                    a.benchmark,
                    a.dataset,
                    a.context_len,
                    fmt_float(a.rel_wql),
                    _opt(a.rel_mase),
                ]
            )
        for d in report.per_dataset:
            writer.writerow(
                ["per-dataset", d.benchmark, d.dataset, "", fmt_float(d.rel_wql), _opt(d.rel_mase)]
            )
        for b in report.per_benchmark:
            writer.writerow(
                ["per-benchmark", b.benchmark, "", "", fmt_float(b.rel_wql), _opt(b.rel_mase)]
            )
        writer.writerow(
            ["overall", "", "", "", fmt_float(report.overall_wql), _opt(report.overall_mase)]
        )
    return path


def format_summary(table: ResultsTable, report: AggregateReport) -> str:
    """Plain-text run summary: relative scores per layer, then failures."""

    def g(value: float | None) -> str:
        return "n/a" if value is None else f"{value:.6g}"

    lines = []
    for b in report.per_benchmark:
        lines.append(f"benchmark {b.benchmark}")
        for d in report.per_dataset:
            if d.benchmark != b.benchmark:
                continue
            lines.append(f"  dataset {d.dataset}")
            for a in report.per_context:
                if a.benchmark != b.benchmark or a.dataset != d.dataset:
                    continue
                lines.append(
                    f"    C={a.context_len}: rel WQL {g(a.rel_wql)}, "
                    f"rel MASE {g(a.rel_mase)}"
                )
            lines.append(
                f"  {d.dataset} aggregate: rel WQL {g(d.rel_wql)}, "
                f"rel MASE {g(d.rel_mase)}"
            )
        lines.append(
            f"benchmark {b.benchmark} aggregate: rel WQL {g(b.rel_wql)}, "
            f"rel MASE {g(b.rel_mase)}"
        )
    lines.append(
        f"overall: rel WQL {g(report.overall_wql)}, rel MASE {g(report.overall_mase)}"
    )
    if table.failures:
        lines.append(f"failed cells: {len(table.failures)}")
        for f in table.failures:
            lines.append(
                f"  {f.dataset} {f.method} C={f.context_len} H={f.horizon}: {f.reason}"
            )
    return "\n".join(lines) + "\n"

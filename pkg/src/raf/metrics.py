"""Forecast scoring: weighted quantile loss, MASE, and the relative-score
geometric-mean aggregation.

Conventions fixed here:
  * WQL pools numerators and the |actual| denominator across every series
    and step of a dataset before dividing, then averages the nine levels.
  * MASE scales mean absolute error by the in-sample seasonal-naive error
    at lag m; a zero denominator raises DegenerateScale so the caller can
    exclude the series with an explicit count instead of poisoning means.
  * Relative score is raf / baseline; aggregation is the geometric mean.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .errors import (
    AllZeroActuals,
    DegenerateScale,
    EmptyInput,
    NonPositiveEntry,
    QuantileCrossing,
    ZeroBaseline,
)

QUANTILE_LEVELS: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)

# seasonal-naive lags per frequency tag; callers may override per run
DEFAULT_SEASONALITY: dict[str, int] = {
    "hourly": 24,
    "daily": 7,
    "weekly": 1,
    "monthly": 12,
    "quarterly": 4,
}


def seasonality_for(freq: str, overrides: dict[str, int] | None = None) -> int:
    table = dict(DEFAULT_SEASONALITY)
    if overrides:
        table.update(overrides)
    return table.get(freq, 1)


@dataclass(frozen=True)
class QuantileForecast:
    """Per-step forecast values at the nine quantile levels.

    values has shape (len(levels), horizon) and is nondecreasing in the
    level at every step; quantile_forecast enforces that by sorting.
    """

    levels: tuple[float, ...]
    values: npt.NDArray[np.float64]

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != len(self.levels):
            raise EmptyInput(
                f"quantile matrix shape {arr.shape} does not match "
                f"{len(self.levels)} levels"
            )
        if arr.shape[0] > 1 and np.any(np.diff(arr, axis=0) < 0):
            raise QuantileCrossing(
                "quantile values must be nondecreasing in the level at every step"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def horizon(self) -> int:
        return int(self.values.shape[1])


@dataclass(frozen=True)
class EvalRecord:
    """One scored benchmark cell: (dataset, method, C, H) with its metrics.

    mase is None when every test series of the cell was excluded as
    degenerate; excluded_mase_count says how many were dropped.
    """

    dataset: str
    method: str
    context_len: int
    horizon: int
    wql: float
    mase: float | None
    excluded_mase_count: int = 0


def quantile_loss(y: float, y_hat: float, q: float) -> float:
    """Pinball loss: q(y - yhat) when y >= yhat, else (1-q)(yhat - y)."""
    if not 0.0 < q < 1.0:
        raise NonPositiveEntry(f"quantile level must be in (0, 1), got {q}")
    if y >= y_hat:
        return q * (y - y_hat)
    return (1.0 - q) * (y_hat - y)


def wql(
    actuals: list[npt.NDArray[np.float64]] | list[list[float]],
    forecasts: list[QuantileForecast],
) -> float:
    """Pooled weighted quantile loss over a dataset.

    Equivalent to (1/9) sum_q [2 * sum(ql_q) / sum|actual|] with both the
    numerators and the denominator pooled across all series and steps;
    factored as 2 * sum_q sum(ql_q) / (9 * sum|actual|) which is the same
    quantity with one fewer rounding per level.
    """
    if len(actuals) != len(forecasts):
        raise EmptyInput(
            f"{len(actuals)} actual segments but {len(forecasts)} forecasts"
        )
    if not actuals:
        raise EmptyInput("wql needs at least one series")
    denom = 0.0
    total = 0.0
    for target, forecast in zip(actuals, forecasts):
        arr = np.asarray(target, dtype=np.float64)
        if arr.shape != (forecast.horizon,):
            raise EmptyInput(
                f"actuals shape {arr.shape} does not match horizon {forecast.horizon}"
            )
        denom += float(np.sum(np.abs(arr)))
        diff = arr[None, :] - forecast.values
        levels = np.asarray(forecast.levels)[:, None]
        losses = np.where(diff >= 0.0, levels * diff, (levels - 1.0) * diff)
        total += float(np.sum(losses))
    if denom == 0.0:
        raise AllZeroActuals("every pooled actual is zero")
    return 2.0 * total / (len(QUANTILE_LEVELS) * denom)


def mase(
    actuals,
    point_forecast,
    history,
    m: int,
) -> float:
    """Mean absolute error scaled by the seasonal-naive in-sample error."""
    target = np.asarray(actuals, dtype=np.float64)
    pred = np.asarray(point_forecast, dtype=np.float64)
    hist = np.asarray(history, dtype=np.float64)
    if target.shape != pred.shape or target.size == 0:
        raise EmptyInput(
            f"actuals shape {target.shape} vs forecast shape {pred.shape}"
        )
    if m < 1:
        raise NonPositiveEntry(f"seasonality must be >= 1, got {m}")
    if hist.size <= m:
        raise DegenerateScale(
            f"history of length {hist.size} has no lag-{m} differences"
        )
    scale = float(np.mean(np.abs(hist[m:] - hist[:-m])))
    if scale == 0.0:
        raise DegenerateScale(f"history is exactly periodic at lag {m}")
    if not math.isfinite(scale):
        raise DegenerateScale(f"history has gaps; lag-{m} scale is not finite")
    return float(np.mean(np.abs(target - pred))) / scale


def relative_score(raf_score: float, baseline_score: float) -> float:
    """raf / baseline; below 1 means the raf method improved."""
    if not baseline_score > 0.0:
        raise ZeroBaseline(f"baseline score must be positive, got {baseline_score}")
    return raf_score / baseline_score


def geometric_mean(ratios) -> float:
    """exp(mean(log r)); every entry must be positive."""
    values = list(ratios)
    if not values:
        raise EmptyInput("geometric mean of an empty sequence")
    total = 0.0
    for r in values:
        if not r > 0.0:
            raise NonPositiveEntry(f"geometric mean needs positive entries, got {r}")
        total += math.log(r)
    return math.exp(total / len(values))

"""Forecaster abstraction: deterministic built-ins, the sample matrix
type, and reductions to point and quantile forecasts.

A forecaster is anything with forecast(request) -> ForecastSamples. The
built-ins are bit-deterministic: identical requests produce identical
samples. External models plug in through the adapter module, which wraps
a child process behind the same interface.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Protocol, runtime_checkable

import numpy as np
import numpy.typing as npt

from .errors import ConfigError, EmptyInput, NonFiniteInput, ShapeMismatch
from .metrics import QUANTILE_LEVELS, QuantileForecast


@dataclass(frozen=True)
class ForecastRequest:
    """One forecasting task: a context, a horizon, and a sample budget.

    auxiliary carries caller extras; the retrieval-copy forecaster reads
    its designated future from auxiliary["designated_future"].
    """

    context: npt.NDArray[np.float64]
    horizon: int
    num_samples: int
    auxiliary: Mapping | None = field(default=None)

    def __post_init__(self) -> None:
        arr = np.asarray(self.context, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise EmptyInput(f"context must be a non-empty vector, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise NonFiniteInput("context contains a non-finite value")
        if self.horizon < 1:
            raise ConfigError(f"horizon must be >= 1, got {self.horizon}")
        if self.num_samples < 1:
            raise ConfigError(f"num_samples must be >= 1, got {self.num_samples}")
        arr.flags.writeable = False
        object.__setattr__(self, "context", arr)


@dataclass(frozen=True)
class ForecastSamples:
    """num_samples x horizon matrix of sampled future trajectories."""

    samples: npt.NDArray[np.float64]

    def __post_init__(self) -> None:
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 2:
            raise ShapeMismatch(f"samples must be 2-d, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise NonFiniteInput("samples contain a non-finite value")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    @property
    def num_samples(self) -> int:
        return int(self.samples.shape[0])

    @property
    def horizon(self) -> int:
        return int(self.samples.shape[1])


@runtime_checkable
class Forecaster(Protocol):
    def forecast(self, request: ForecastRequest) -> ForecastSamples: ...


class ZeroForecaster:
    """Every sample is all zeros; the scaled-MSE baseline."""

    name = "zero"

    def forecast(self, request: ForecastRequest) -> ForecastSamples:
        return ForecastSamples(
            samples=np.zeros((request.num_samples, request.horizon))
        )


class SeasonalNaiveForecaster:
    """Repeats the last seasonal cycle of the context.

    Step t forecasts context[-m + (t mod m)]; when m exceeds the context
    length the whole context serves as the cycle.
    """

    name = "seasonal-naive"

    def __init__(self, m: int = 1):
        if m < 1:
            raise ConfigError(f"seasonality must be >= 1, got {m}")
        self.m = m

    def forecast(self, request: ForecastRequest) -> ForecastSamples:
        cycle_len = min(self.m, request.context.size)
        cycle = request.context[-cycle_len:]
        steps = np.arange(request.horizon) % cycle_len
        row = cycle[steps]
        return ForecastSamples(samples=np.tile(row, (request.num_samples, 1)))


class RetrievalCopyForecaster:
    """Returns the caller-designated retrieved-future segment verbatim.

    Emulates a model that copies its retrieval exemplar; every sample is
    the first horizon entries of auxiliary["designated_future"].
    """

    name = "retrieval-copy"

    def forecast(self, request: ForecastRequest) -> ForecastSamples:
        aux = request.auxiliary or {}
        if "designated_future" not in aux:
            raise EmptyInput(
                "retrieval-copy needs auxiliary['designated_future'] in the request"
            )
        future = np.asarray(aux["designated_future"], dtype=np.float64)
        if future.ndim != 1 or future.size < request.horizon:
            raise ShapeMismatch(
                f"designated future of shape {future.shape} cannot cover "
                f"horizon {request.horizon}"
            )
        row = future[: request.horizon]
        return ForecastSamples(samples=np.tile(row, (request.num_samples, 1)))


def forecast(forecaster: Forecaster, request: ForecastRequest) -> ForecastSamples:
    """Dispatch to a forecaster and enforce the response shape contract."""
    result = forecaster.forecast(request)
    if not isinstance(result, ForecastSamples):
        raise ShapeMismatch(
            f"forecaster returned {type(result).__name__}, not ForecastSamples"
        )
    if result.samples.shape != (request.num_samples, request.horizon):
        raise ShapeMismatch(
            f"samples shape {result.samples.shape} != "
            f"({request.num_samples}, {request.horizon})"
        )
    return result


def point_forecast(samples: ForecastSamples) -> npt.NDArray[np.float64]:
    """Per-step lower median: element (n-1)//2 of each sorted column."""
    ordered = np.sort(samples.samples, axis=0)
    return ordered[(samples.num_samples - 1) // 2]


def quantile_forecast(
    samples: ForecastSamples, levels: tuple[float, ...] = QUANTILE_LEVELS
) -> QuantileForecast:
    """Per-step empirical quantiles with linear interpolation.

    A per-step sort afterwards enforces monotonicity across levels even
    when float interpolation would jitter adjacent levels.
    """
    values = np.quantile(samples.samples, levels, axis=0, method="linear")
    return QuantileForecast(levels=tuple(levels), values=np.sort(values, axis=0))


def make_forecaster(
    spec: str,
    *,
    seasonality: int = 1,
    adapter_command: str | None = None,
    timeout: float = 120.0,
):
    """Build a forecaster from its config name.

    "zero", "seasonal-naive", and "retrieval-copy" are built-ins;
    "adapter" spawns the external process given by adapter_command.
    """
    if spec == "zero":
        return ZeroForecaster()
    if spec == "seasonal-naive":
        return SeasonalNaiveForecaster(m=seasonality)
    if spec == "retrieval-copy":
        return RetrievalCopyForecaster()
    if spec == "adapter":
        if not adapter_command:
            raise ConfigError(
                "forecaster 'adapter' needs an adapter command "
                "(--adapter flag, RAF_ADAPTER, or config key)"
            )
        from .adapter import AdapterForecaster  # deferred: adapter imports this module

        return AdapterForecaster(adapter_command, timeout=timeout)
    raise ConfigError(f"unknown forecaster spec {spec!r}")

"""Synthetic retrieval experiment: rotated superposed sinusoids, noisy
retrieved copies, raw query assembly, and scaled-MSE sweeps over a
signal-to-noise grid.

The query here is a raw concatenation [noisy context, noisy future,
clean context] with no normalization or alignment; that is the point of
the experiment, which isolates how forecast quality depends on the noise
level of the retrieved segment.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import numpy.typing as npt

from ._format import fmt_float
from .errors import ConfigError, LengthMismatch, RafError, SweepAborted, ZeroTruth
from .forecasters import Forecaster, ForecastRequest, forecast

_ROTATION_MODES = ("random-orthonormal", "identity")


@dataclass(frozen=True)
class SynthConfig:
    """Experiment shape: signal length is context_len + horizon."""

    context_len: int
    horizon: int
    f1: float
    f2: float
    phase: float
    sigma: float
    seed: int
    num_instances: int
    num_model_samples: int = 20
    rotation_mode: str = "random-orthonormal"

    def __post_init__(self) -> None:
        if self.context_len < 1 or self.horizon < 1:
            raise ConfigError(
                f"context_len and horizon must be >= 1, got "
                f"({self.context_len}, {self.horizon})"
            )
        if self.sigma < 0:
            raise ConfigError(f"sigma must be >= 0, got {self.sigma}")
        if self.num_instances < 1:
            raise ConfigError(f"num_instances must be >= 1, got {self.num_instances}")
        if self.num_model_samples < 1:
            raise ConfigError(
                f"num_model_samples must be >= 1, got {self.num_model_samples}"
            )
        if self.rotation_mode not in _ROTATION_MODES:
            raise ConfigError(
                f"rotation_mode must be one of {_ROTATION_MODES}, "
                f"got {self.rotation_mode!r}"
            )

    @property
    def length(self) -> int:
        return self.context_len + self.horizon


@dataclass(frozen=True)
class SynthInstance:
    """One experiment draw.

    signal: clean rotated series of length L; rotation: the orthonormal
    matrix used; noisy: signal + noise (the retrieved copy); query: the
    assembled length L + C input.
    """

    signal: npt.NDArray[np.float64]
    rotation: npt.NDArray[np.float64]
    noisy: npt.NDArray[np.float64]
    query: npt.NDArray[np.float64]


def _random_orthonormal(n: int, rng: np.random.Generator) -> npt.NDArray[np.float64]:
    # positive-diagonal sign convention makes the QR factorization unique,
    # so the rotation is reproducible across BLAS builds
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def generate_signal(
    config: SynthConfig, instance_seed
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Draw one clean signal: an orthonormal rotation of two superposed
    sinusoids sin(pi*f1*t + phase) + sin(pi*f2*t + phase), t = 0..L-1."""
    rng = np.random.default_rng(instance_seed)
    t = np.arange(config.length, dtype=np.float64)
    base = np.sin(np.pi * config.f1 * t + config.phase) + np.sin(
        np.pi * config.f2 * t + config.phase
    )
    if config.rotation_mode == "identity":
        rotation = np.eye(config.length)
    else:
        rotation = _random_orthonormal(config.length, rng)
    return rotation @ base, rotation


def make_noisy_copy(
    signal: npt.NDArray[np.float64], sigma: float, noise_seed
) -> npt.NDArray[np.float64]:
    """signal + N(0, sigma^2) elementwise; sigma 0 returns it unchanged."""
    if sigma < 0:
        raise ConfigError(f"sigma must be >= 0, got {sigma}")
    signal = np.asarray(signal, dtype=np.float64)
    if sigma == 0:
        return signal.copy()
    rng = np.random.default_rng(noise_seed)
    return signal + rng.normal(0.0, sigma, signal.shape)


def assemble_raf_query(
    signal: npt.NDArray[np.float64],
    noisy: npt.NDArray[np.float64],
    context_len: int,
    horizon: int,
) -> npt.NDArray[np.float64]:
    """Concatenate [noisy context, noisy future, clean context], raw."""
    signal = np.asarray(signal, dtype=np.float64)
    noisy = np.asarray(noisy, dtype=np.float64)
    length = context_len + horizon
    if signal.shape != (length,) or noisy.shape != (length,):
        raise LengthMismatch(
            f"need two series of length {length}, got shapes "
            f"{signal.shape} and {noisy.shape}"
        )
    return np.concatenate(
        [noisy[:context_len], noisy[context_len:], signal[:context_len]]
    )


def make_instance(config: SynthConfig, sigma: float, instance_seed) -> SynthInstance:
    """Draw signal and noise from two child seeds of instance_seed."""
    signal_seed, noise_seed = np.random.SeedSequence(instance_seed).spawn(2)
    signal, rotation = generate_signal(config, signal_seed)
    noisy = make_noisy_copy(signal, sigma, noise_seed)
    query = assemble_raf_query(signal, noisy, config.context_len, config.horizon)
    return SynthInstance(signal=signal, rotation=rotation, noisy=noisy, query=query)


def scaled_mse(pred: npt.NDArray[np.float64], truth: npt.NDArray[np.float64]) -> float:
    """MSE(pred, truth) / MSE(zeros, truth)."""
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape or pred.ndim != 1 or pred.size == 0:
        raise LengthMismatch(
            f"pred and truth must be equal-length vectors, got "
            f"{pred.shape} and {truth.shape}"
        )
    # numerator and denominator share one code path so the all-zero
    # prediction scores exactly 1.0
    num = float(np.mean(np.square(pred - truth)))
    denom = float(np.mean(np.square(np.zeros_like(truth) - truth)))
    if denom == 0.0:
        raise ZeroTruth("truth segment is identically zero")
    return num / denom


@dataclass(frozen=True)
class SweepPoint:
    snr: float
    sigma: float
    mean_scaled_mse: float
    stderr: float
    num_instances: int


def snr_sweep(
    config: SynthConfig,
    forecaster: Forecaster,
    snr_grid: Sequence[float],
) -> list[SweepPoint]:
    """Score a forecaster at each SNR value.

    Per instance, sigma is set so Var(signal)/sigma^2 equals the grid
    value, the forecaster is sampled num_model_samples times on the
    assembled query, and the per-step mean trajectory is scored against
    the clean future. Seeds derive from (config.seed, snr index,
    instance index), so parallel and serial execution agree bit-exactly.
    """
    if any(s <= 0 for s in snr_grid):
        raise ConfigError(f"snr grid must be positive, got {list(snr_grid)}")
    points = []
    for snr_idx, snr in enumerate(snr_grid):
        scores = np.empty(config.num_instances)
        sigmas = np.empty(config.num_instances)
        for inst_idx in range(config.num_instances):
            seed = np.random.SeedSequence((config.seed, snr_idx, inst_idx))
            signal_seed, noise_seed = seed.spawn(2)
            signal, _ = generate_signal(config, signal_seed)
            sigma = math.sqrt(float(np.var(signal)) / snr)
            noisy = make_noisy_copy(signal, sigma, noise_seed)
            query = assemble_raf_query(
                signal, noisy, config.context_len, config.horizon
            )
            request = ForecastRequest(
                context=query,
                horizon=config.horizon,
                num_samples=config.num_model_samples,
                auxiliary={"designated_future": noisy[config.context_len :]},
            )
            try:
                samples = forecast(forecaster, request)
            except RafError as exc:
                raise SweepAborted(snr, exc) from exc
            pred = samples.samples.mean(axis=0)
            scores[inst_idx] = scaled_mse(pred, signal[config.context_len :])
            sigmas[inst_idx] = sigma
        mean = float(np.mean(scores))
        if config.num_instances > 1:
            stderr = float(np.std(scores, ddof=1) / math.sqrt(config.num_instances))
        else:
            stderr = 0.0
        points.append(
            SweepPoint(
                snr=float(snr),
                sigma=float(np.mean(sigmas)),
                mean_scaled_mse=mean,
                stderr=stderr,
                num_instances=config.num_instances,
            )
        )
    return points


def write_sweep_csv(points: Sequence[SweepPoint], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["snr", "sigma", "mean_scaled_mse", "stderr", "num_instances"])
        for p in points:
            writer.writerow(
                [
                    fmt_float(p.snr),
                    fmt_float(p.sigma),
                    fmt_float(p.mean_scaled_mse),
                    fmt_float(p.stderr),
                    p.num_instances,
                ]
            )

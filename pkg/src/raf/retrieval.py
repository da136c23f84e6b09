"""Database formation, sliding-window indexing, nearest-neighbor search,
and retrieval-query assembly.

The pipeline this module implements: split a dataset into database and
test sides, index every stride-spaced window of the database that has a
complete length-H future, find the top matches for a normalized query
window by exact L2 scan, splice the match into an augmented query
(retrieved context, retrieved future, original context, endpoint-aligned),
and project model output back to original units.

Determinism contracts:
  * split_dataset orders indices by sha256("{seed}:{i}") so the same
    (dataset order, seed) pair splits identically on every platform.
  * top_n equals an exhaustive linear scan exactly; ties break by entry
    insertion order (stable sort).
  * Index snapshots round-trip bit-exactly through save_index/load_index.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import numpy.typing as npt

from .errors import (
    ConfigError,
    EmptyDataset,
    EmptyIndex,
    EmptyInput,
    LengthMismatch,
    NoValidWindows,
    ShortSample,
)
from .forecasters import ForecastSamples
from .series import NormStats, TimeSeries, instance_normalize

SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class WindowIndex:
    """Immutable search structure over normalized database windows.

    Entry arrays run in (series insertion order, offset) order, which is
    the tie-break order for equal distances. Every entry satisfies
    offset + C + H <= len(source) and covers no missing value in either
    its window or its future span. Embeddings default to the normalized
    window itself (dimension C); an external embedder may change the
    dimension but not the count or order of entries.
    """

    window_len: int
    future_len: int
    stride: int
    series: tuple[TimeSeries, ...]
    entry_series: npt.NDArray[np.int64]
    entry_offsets: npt.NDArray[np.int64]
    embeddings: npt.NDArray[np.float64]
    entry_means: npt.NDArray[np.float64]
    entry_stds: npt.NDArray[np.float64]
    entry_degenerate: npt.NDArray[np.bool_]

    def __post_init__(self) -> None:
        for name in (
            "entry_series",
            "entry_offsets",
            "embeddings",
            "entry_means",
            "entry_stds",
            "entry_degenerate",
        ):
            arr = getattr(self, name)
            arr.flags.writeable = False

    def __len__(self) -> int:
        return int(self.entry_offsets.size)

    @property
    def embed_dim(self) -> int:
        return int(self.embeddings.shape[1])

    def entry_stats(self, i: int) -> NormStats:
        return NormStats(
            mean=float(self.entry_means[i]),
            std=float(self.entry_stds[i]),
            degenerate=bool(self.entry_degenerate[i]),
        )


@dataclass(frozen=True)
class RetrievedMatch:
    """One search hit: source identity plus the raw window and future."""

    series_id: str
    offset: int
    distance: float
    retrieved_context: npt.NDArray[np.float64]
    retrieved_future: npt.NDArray[np.float64]


@dataclass(frozen=True)
class RafQuery:
    """The augmented model input [retrieved context, retrieved future,
    original context] with the retrieved segment shifted so its last value
    equals the first value of the normalized original context bitwise.

    orig_stats de-normalizes forecasts back to original units;
    boundary_offset records the constant added to the retrieved segment.
    """

    augmented: npt.NDArray[np.float64]
    orig_stats: NormStats
    boundary_offset: float
    retrieved_context_len: int
    retrieved_future_len: int

    def retrieved_future_segment(self) -> npt.NDArray[np.float64]:
        """The shifted retrieved-future slice, in model (normalized) units."""
        start = self.retrieved_context_len
        return self.augmented[start : start + self.retrieved_future_len]


def _split_permutation(n: int, seed: int) -> list[int]:
    # ordering by the hex digest of "{seed}:{i}" is platform-independent
    # and easy to reimplement as an oracle
    return sorted(
        range(n),
        key=lambda i: hashlib.sha256(f"{seed}:{i}".encode()).hexdigest(),
    )


def split_dataset(
    dataset: Sequence[TimeSeries], test_fraction: float, seed: int
) -> tuple[list[TimeSeries], list[TimeSeries]]:
    """Deterministically partition a dataset into (database, test).

    The first ceil(test_fraction * N) indices of the seeded permutation
    become the test side. Both sides come back in original dataset order.
    """
    if not dataset:
        raise EmptyDataset("cannot split an empty dataset")
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"test fraction must be in (0, 1), got {test_fraction}")
    perm = _split_permutation(len(dataset), seed)
    n_test = math.ceil(test_fraction * len(dataset))
    test_idx = sorted(perm[:n_test])
    db_idx = sorted(perm[n_test:])
    return [dataset[i] for i in db_idx], [dataset[i] for i in test_idx]


def split_dataset_three(
    dataset: Sequence[TimeSeries],
    test_fraction: float,
    validation_fraction: float,
    seed: int,
) -> tuple[list[TimeSeries], list[TimeSeries], list[TimeSeries]]:
    """Three-way variant sharing split_dataset's permutation: the test
    slice comes first, then validation, remainder database."""
    if not dataset:
        raise EmptyDataset("cannot split an empty dataset")
    if not 0.0 < test_fraction < 1.0 or validation_fraction < 0.0:
        raise ConfigError(
            f"bad fractions: test={test_fraction}, validation={validation_fraction}"
        )
    if test_fraction + validation_fraction >= 1.0:
        raise ConfigError("test + validation fractions must leave room for the database")
    perm = _split_permutation(len(dataset), seed)
    n_test = math.ceil(test_fraction * len(dataset))
    n_val = math.ceil(validation_fraction * len(dataset))
    test_idx = sorted(perm[:n_test])
    val_idx = sorted(perm[n_test : n_test + n_val])
    db_idx = sorted(perm[n_test + n_val :])
    return (
        [dataset[i] for i in db_idx],
        [dataset[i] for i in val_idx],
        [dataset[i] for i in test_idx],
    )


def build_index(
    database: Sequence[TimeSeries],
    window_len: int,
    future_len: int,
    stride: int = 1,
    embedder: Callable[[npt.NDArray[np.float64]], npt.NDArray[np.float64]] | None = None,
) -> WindowIndex:
    """Index every complete, gap-free window of the database series.

    Windows start at offsets 0, stride, 2*stride, ... and require both the
    window and its length-H future to be inside the series and free of
    missing values. The embedding is the instance-normalized window unless
    an embedder callable is supplied (it receives the normalized window).
    """
    if window_len < 1 or future_len < 1 or stride < 1:
        raise ConfigError(
            f"window_len, future_len, stride must be >= 1; got "
            f"{window_len}, {future_len}, {stride}"
        )
    entry_series: list[int] = []
    entry_offsets: list[int] = []
    embeddings: list[npt.NDArray[np.float64]] = []
    means: list[float] = []
    stds: list[float] = []
    degenerate: list[bool] = []
    for series_idx, series in enumerate(database):
        values = series.values
        span = window_len + future_len
        for offset in range(0, len(series) - span + 1, stride):
            segment = values[offset : offset + span]
            if np.isnan(segment).any():
                continue
            window = segment[:window_len]
            normalized, stats = instance_normalize(window)
            vector = normalized if embedder is None else np.asarray(
                embedder(normalized), dtype=np.float64
            )
            if embeddings and vector.shape != embeddings[0].shape:
                raise LengthMismatch(
                    f"embedder returned dimension {vector.shape} after "
                    f"{embeddings[0].shape}"
                )
            entry_series.append(series_idx)
            entry_offsets.append(offset)
            embeddings.append(vector)
            means.append(stats.mean)
            stds.append(stats.std)
            degenerate.append(stats.degenerate)
    if not embeddings:
        raise NoValidWindows(
            f"no series offers a complete window of {window_len} + {future_len} points"
        )
    return WindowIndex(
        window_len=window_len,
        future_len=future_len,
        stride=stride,
        series=tuple(database),
        entry_series=np.asarray(entry_series, dtype=np.int64),
        entry_offsets=np.asarray(entry_offsets, dtype=np.int64),
        embeddings=np.stack(embeddings),
        entry_means=np.asarray(means, dtype=np.float64),
        entry_stds=np.asarray(stds, dtype=np.float64),
        entry_degenerate=np.asarray(degenerate, dtype=np.bool_),
    )


def top_n(query_embedding, index: WindowIndex, n: int) -> list[RetrievedMatch]:
    """The n entries nearest the query in L2, ascending, ties by entry order.

    Asking for more entries than the index holds returns all of them.
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if len(index) == 0:
        raise EmptyIndex("the index holds no entries")
    query = np.asarray(query_embedding, dtype=np.float64)
    if query.shape != (index.embed_dim,):
        raise LengthMismatch(
            f"query dimension {query.shape} does not match index dimension "
            f"({index.embed_dim},)"
        )
    distances = np.linalg.norm(index.embeddings - query[None, :], axis=1)
    order = np.argsort(distances, kind="stable")[: min(n, len(index))]
    matches = []
    for i in order:
        series = index.series[int(index.entry_series[i])]
        offset = int(index.entry_offsets[i])
        c, h = index.window_len, index.future_len
        matches.append(
            RetrievedMatch(
                series_id=series.id,
                offset=offset,
                distance=float(distances[i]),
                retrieved_context=series.values[offset : offset + c],
                retrieved_future=series.values[offset + c : offset + c + h],
            )
        )
    return matches


def form_raf_query(original_context, match: RetrievedMatch) -> RafQuery:
    """Normalize, align, and concatenate a match with the original context.

    The original context and the retrieved series (context followed by
    future) are normalized separately; the whole retrieved segment is then
    shifted by a single constant so its final value meets the first value
    of the normalized original context, and the boundary element is
    assigned outright so the continuity residual is exactly zero. A
    constant original context proceeds with degenerate stats (flagged in
    orig_stats) rather than failing.
    """
    context = np.asarray(original_context, dtype=np.float64)
    if context.size < 2:
        raise EmptyInput(f"original context needs >= 2 points, got {context.size}")
    norm_orig, orig_stats = instance_normalize(context)
    retrieved = np.concatenate([match.retrieved_context, match.retrieved_future])
    norm_retr, _ = instance_normalize(retrieved)
    offset = float(norm_orig[0] - norm_retr[-1])
    shifted = norm_retr + offset
    # a + (b - a) need not equal b in floats; pin the boundary bitwise
    shifted[-1] = norm_orig[0]
    return RafQuery(
        augmented=np.concatenate([shifted, norm_orig]),
        orig_stats=orig_stats,
        boundary_offset=offset,
        retrieved_context_len=int(match.retrieved_context.size),
        retrieved_future_len=int(match.retrieved_future.size),
    )


def project_forecast(model_output, horizon: int, orig_stats: NormStats) -> ForecastSamples:
    """Truncate sampled continuations to the horizon and de-normalize."""
    samples = np.asarray(model_output, dtype=np.float64)
    if samples.ndim == 1:
        samples = samples[None, :]
    if samples.ndim != 2:
        raise ShortSample(f"expected sample rows, got shape {samples.shape}")
    if samples.shape[1] < horizon:
        raise ShortSample(
            f"samples of length {samples.shape[1]} cannot cover horizon {horizon}"
        )
    truncated = samples[:, :horizon]
    return ForecastSamples(samples=truncated * orig_stats.std + orig_stats.mean)


def save_index(index: WindowIndex, path) -> None:
    """Write a versioned snapshot; load_index restores it bit-exactly.

    Layout (NumPy .npz, no pickling): meta = [version, C, H, stride];
    per-series id/freq/length arrays plus one concatenated value array;
    per-entry series index, offset, embedding row, and cached stats.
    """
    lengths = np.asarray([len(s) for s in index.series], dtype=np.int64)
    np.savez(
        path,
        meta=np.asarray(
            [SNAPSHOT_VERSION, index.window_len, index.future_len, index.stride],
            dtype=np.int64,
        ),
        series_ids=np.asarray([s.id for s in index.series], dtype=np.str_),
        series_freqs=np.asarray([s.freq for s in index.series], dtype=np.str_),
        series_lengths=lengths,
        series_values=(
            np.concatenate([s.values for s in index.series])
            if index.series
            else np.zeros(0)
        ),
        entry_series=index.entry_series,
        entry_offsets=index.entry_offsets,
        embeddings=index.embeddings,
        entry_means=index.entry_means,
        entry_stds=index.entry_stds,
        entry_degenerate=index.entry_degenerate,
    )


def load_index(path) -> WindowIndex:
    with np.load(path, allow_pickle=False) as data:
        meta = data["meta"]
        if int(meta[0]) != SNAPSHOT_VERSION:
            raise ConfigError(f"unsupported index snapshot version {int(meta[0])}")
        lengths = data["series_lengths"]
        flat = data["series_values"]
        series = []
        cursor = 0
        for sid, freq, length in zip(
            data["series_ids"], data["series_freqs"], lengths
        ):
            series.append(
                TimeSeries(
                    id=str(sid), freq=str(freq), values=flat[cursor : cursor + int(length)]
                )
            )
            cursor += int(length)
        return WindowIndex(
            window_len=int(meta[1]),
            future_len=int(meta[2]),
            stride=int(meta[3]),
            series=tuple(series),
            entry_series=data["entry_series"].copy(),
            entry_offsets=data["entry_offsets"].copy(),
            embeddings=data["embeddings"].copy(),
            entry_means=data["entry_means"].copy(),
            entry_stds=data["entry_stds"].copy(),
            entry_degenerate=data["entry_degenerate"].copy(),
        )

"""Series representation, instance normalization, patching, and the
direction/norm token embedding with its inverse decoder.

Invariants maintained here:
  * denormalize(instance_normalize(x)) == x within 1e-12 relative error.
  * extract_patches yields exactly L - C + 1 patches at stride 1.
  * decode_embedding(embed_patch(p)) == p within 1e-12; the embedding is
    bijective on nonzero patches and maps zero patches to (0-vector, 0).
  * Normalization uses the population standard deviation; inputs whose
    std falls below 1e-12 normalize to all zeros with std substituted by 1
    and the degenerate flag set.

All types are immutable after construction and all operations are pure.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from .errors import EmptyInput, NonFiniteInput, WindowTooLong

# raw std below this normalizes to zeros with std := 1
DEGENERATE_STD = 1e-12

# patch norms below this embed to the zero token
ZERO_NORM = 1e-12


def _as_float_array(values) -> npt.NDArray[np.float64]:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise EmptyInput(f"expected a 1-d sequence, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class TimeSeries:
    """A univariate series with identity and a frequency tag.

    Missing entries are encoded as NaN and are legal here; they must never
    reach a numeric kernel (patching excludes windows that touch them).
    """

    id: str
    freq: str
    values: npt.NDArray[np.float64]

    def __post_init__(self) -> None:
        if not self.id:
            raise EmptyInput("series id is empty")
        arr = _as_float_array(self.values)
        if arr.size == 0:
            raise EmptyInput(f"series {self.id!r} has no values")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class NormStats:
    """Reversible per-instance normalization statistics."""

    mean: float
    std: float
    degenerate: bool = False

    def __post_init__(self) -> None:
        if not self.std > 0.0:
            raise NonFiniteInput(f"std must be positive, got {self.std!r}")


@dataclass(frozen=True)
class Patch:
    """A length-C stride-1 window; valid iff it contains no missing value."""

    start: int
    values: npt.NDArray[np.float64]
    valid: bool = field(default=True)

    def __post_init__(self) -> None:
        arr = _as_float_array(self.values)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "valid", not bool(np.isnan(arr).any()))


@dataclass(frozen=True)
class EmbeddedToken:
    """The [direction; norm] token: direction is unit length (or the zero
    vector for zero-norm patches) and norm is the patch magnitude."""

    direction: npt.NDArray[np.float64]
    norm: float

    def __post_init__(self) -> None:
        arr = _as_float_array(self.direction)
        arr.flags.writeable = False
        object.__setattr__(self, "direction", arr)


def instance_normalize(values) -> tuple[npt.NDArray[np.float64], NormStats]:
    """Rescale to zero mean and unit population std.

    Degenerate inputs (raw std below 1e-12 relative to the mean's
    magnitude) return all zeros with std substituted by 1 and the stats
    flagged, so constant series survive the pipeline and round-trip
    through denormalize. The threshold scales with the mean because a
    constant series of large magnitude carries rounding noise of order
    ulp(mean) in its computed std.
    """
    arr = _as_float_array(values)
    if arr.size == 0:
        raise EmptyInput("cannot normalize an empty sequence")
    if not np.isfinite(arr).all():
        raise NonFiniteInput("a non-finite entry reached instance_normalize")
    mean = float(np.mean(arr))
    std = float(np.std(arr))
    if std < DEGENERATE_STD * max(1.0, abs(mean)):
        return np.zeros_like(arr), NormStats(mean=mean, std=1.0, degenerate=True)
    return (arr - mean) / std, NormStats(mean=mean, std=std, degenerate=False)


def denormalize(values, stats: NormStats) -> npt.NDArray[np.float64]:
    """Exact inverse of instance_normalize: v * std + mean elementwise.

    Accepts any shape; sample matrices de-normalize row by row.
    """
    arr = np.asarray(values, dtype=np.float64)
    return arr * stats.std + stats.mean


def extract_patches(values, window_len: int) -> list[Patch]:
    """All stride-1 windows of length window_len, in offset order.

    Always returns exactly L - C + 1 patches; windows that overlap a
    missing value come back with valid=False and are excluded from
    indexing downstream.
    """
    arr = _as_float_array(values)
    if window_len < 1:
        raise WindowTooLong(f"window length must be >= 1, got {window_len}")
    if window_len > arr.size:
        raise WindowTooLong(
            f"window length {window_len} exceeds series length {arr.size}"
        )
    return [
        Patch(start=k, values=arr[k : k + window_len])
        for k in range(arr.size - window_len + 1)
    ]


def embed_patch(patch) -> EmbeddedToken:
    """Map a patch to its [direction; norm] token.

    Patches with norm below 1e-12 embed to (zero direction, norm 0) so the
    map is total; decode_embedding is its exact inverse on everything
    this function can produce.
    """
    if isinstance(patch, Patch):
        if not patch.valid:
            raise NonFiniteInput(f"patch at offset {patch.start} contains a gap")
        arr = patch.values
    else:
        arr = _as_float_array(patch)
    if not np.isfinite(arr).all():
        raise NonFiniteInput("a non-finite entry reached embed_patch")
    norm = float(np.linalg.norm(arr))
    if norm < ZERO_NORM:
        return EmbeddedToken(direction=np.zeros_like(arr), norm=0.0)
    return EmbeddedToken(direction=arr / norm, norm=norm)


def decode_embedding(token: EmbeddedToken) -> npt.NDArray[np.float64]:
    """The inverse map g: direction * norm recovers the raw patch."""
    return token.direction * token.norm

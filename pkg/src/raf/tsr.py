"""Two-layer attention retriever for exact-motif lookup.

The model answers: given a series whose final length-C window has a unique
exact earlier match, which C values followed that match? Layer 1 attends
from the embedded query token to the token block of every earlier window;
layer 2 rotates the attended positional encoding forward by C positions to
pick out the successor window, whose token block decodes to the answer.

Construction notes, load-bearing for the exactness guarantee:
  * Tokens are [direction; norm] embeddings with positional encodings in a
    disjoint coordinate block, so token/positional projections are exact.
  * The layer-1 normalizer scales each row so its TOKEN BLOCK has unit
    length. The score against the embedded query is then proportional to
    the cosine between token blocks, which is uniquely maximized by the
    exact match for any data. Normalizing whole rows (positional block
    included) breaks that: a window with high direction cosine and roughly
    twice the query norm can outscore the exact match.
  * Positional encodings are multi-frequency block rotations (periods
    num_tokens + C + 1, 4, 5, 7, 9, 11, 13). Any two positions within
    range disagree on at least one frequency by a full step, so the
    layer-2 score gap is at least (1 - cos(2*pi/13)) / 7 ~ 0.016 and the
    runner-up softmax weight at saturation scale 1e4 is ~e^-160. A single
    frequency spanning the range leaves a gap of order 1/L^2, which is not
    saturable to 1e-6 at that scale.

As the saturation scale c grows the attention weight on the true match is
nondecreasing and the output converges to the successor window; c >= 1e4
reaches machine precision on exact-match instances. c = 0 yields uniform
attention; noisy inputs yield the soft mixture, with exactness promised
only for unique exact matches.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .errors import EmptyInput, NoTokens, NonFiniteInput, WindowTooLong, ZeroNormQuery
from .series import embed_patch, extract_patches

# fixed short rotation periods; pairwise coprime-ish so every displacement
# below lcm = 180180 misses at least one full cycle
_FIXED_PERIODS: tuple[int, ...] = (4, 5, 7, 9, 11, 13)


def softmax(scores) -> npt.NDArray[np.float64]:
    """Stable softmax: positive entries summing to 1, max subtracted first."""
    arr = np.asarray(scores, dtype=np.float64)
    if arr.size == 0:
        raise EmptyInput("softmax of an empty score vector")
    if not np.isfinite(arr).all():
        raise NonFiniteInput("softmax requires finite scores")
    shifted = np.exp(arr - np.max(arr))
    return shifted / np.sum(shifted)


@dataclass(frozen=True)
class PosEncoding:
    """Unit-norm positional encodings with a forward-by-C rotation.

    Row k of vectors encodes 1-based position k + 1; the rotation advances
    any position by C: vectors[k + C] == rotation @ vectors[k] exactly, for
    every k with both rows in range. angle is the finest (range-spanning)
    frequency step 2*pi / (num_tokens + C + 1). Token and positional
    coordinates never share indices, so their projections are exact.
    """

    vectors: npt.NDArray[np.float64]
    rotation: npt.NDArray[np.float64]
    angle: float

    def __post_init__(self) -> None:
        vec = np.asarray(self.vectors, dtype=np.float64)
        rot = np.asarray(self.rotation, dtype=np.float64)
        vec.flags.writeable = False
        rot.flags.writeable = False
        object.__setattr__(self, "vectors", vec)
        object.__setattr__(self, "rotation", rot)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])


def make_positional_encodings(num_tokens: int, window_len: int) -> PosEncoding:
    """Build encodings for positions 1..num_tokens with step C = window_len.

    Each position i maps to the concatenation over frequencies psi of
    (cos(i*psi), sin(i*psi)) / sqrt(m). The rotation advancing a position
    by C is block-diagonal over the same frequency pairs, hence exactly
    orthogonal, and p_{i+C} = R @ p_i holds to the last bit of the trig
    evaluations.
    """
    if num_tokens < 1:
        raise EmptyInput(f"need at least one token, got {num_tokens}")
    base_period = num_tokens + window_len + 1
    periods = (base_period, *_FIXED_PERIODS)
    m = len(periods)
    psis = 2.0 * np.pi / np.asarray(periods, dtype=np.float64)
    positions = np.arange(1, num_tokens + 1, dtype=np.float64)
    angles = positions[:, None] * psis[None, :]
    vectors = np.empty((num_tokens, 2 * m), dtype=np.float64)
    vectors[:, 0::2] = np.cos(angles)
    vectors[:, 1::2] = np.sin(angles)
    vectors /= np.sqrt(m)

    rotation = np.zeros((2 * m, 2 * m), dtype=np.float64)
    step = window_len * psis
    for j in range(m):
        cos_a = np.cos(step[j])
        sin_a = np.sin(step[j])
        rotation[2 * j, 2 * j] = cos_a
        rotation[2 * j, 2 * j + 1] = -sin_a
        rotation[2 * j + 1, 2 * j] = sin_a
        rotation[2 * j + 1, 2 * j + 1] = cos_a
    return PosEncoding(
        vectors=vectors, rotation=rotation, angle=float(2.0 * np.pi / base_period)
    )


@dataclass(frozen=True)
class TsrSolution:
    """Decoded prediction plus both attention weight vectors."""

    prediction: npt.NDArray[np.float64]
    layer1_weights: npt.NDArray[np.float64]
    layer2_weights: npt.NDArray[np.float64]


@dataclass(frozen=True)
class TsrModel:
    """Frozen token matrices and weights for one series.

    tokens stacks [direction, norm, positional] per stride-1 window; the
    truncated matrix drops the final (query) row. normalizer holds the
    per-row scale making each token block unit length (rows whose patch is
    identically zero get scale 1; they score zero against any query).
    """

    tokens: npt.NDArray[np.float64]
    truncated: npt.NDArray[np.float64]
    normalizer: npt.NDArray[np.float64]
    token_projection: npt.NDArray[np.float64]
    positional_projection: npt.NDArray[np.float64]
    pos: PosEncoding
    window_len: int
    scale: float

    @property
    def num_tokens(self) -> int:
        return int(self.tokens.shape[0])

    @property
    def rotation_full(self) -> npt.NDArray[np.float64]:
        """The positional rotation embedded in full token-space dimensions."""
        dim = self.tokens.shape[1]
        split = self.window_len + 1
        out = np.eye(dim)
        out[split:, split:] = self.pos.rotation
        return out

    def query_token(self) -> npt.NDArray[np.float64]:
        """The final window embedded with a zero positional block."""
        split = self.window_len + 1
        token = self.tokens[-1].copy()
        token[split:] = 0.0
        if token[self.window_len] == 0.0:
            raise ZeroNormQuery("the final motif has zero norm")
        return token

    def solve(self) -> TsrSolution:
        query = self.query_token()
        w1_matrix = self.scale * self.token_projection
        scores1 = (self.normalizer[:, None] * self.truncated) @ (w1_matrix @ query)
        weights1 = softmax(scores1)
        attended = self.truncated.T @ weights1

        w2_matrix = self.scale * (
            self.positional_projection @ self.rotation_full @ self.positional_projection
        )
        scores2 = self.truncated @ (w2_matrix @ attended)
        weights2 = softmax(scores2)
        output = self.truncated.T @ weights2

        c = self.window_len
        prediction = output[:c] * output[c]
        return TsrSolution(
            prediction=prediction, layer1_weights=weights1, layer2_weights=weights2
        )


def build_tsr_model(series, window_len: int, scale: float) -> TsrModel:
    """Embed every stride-1 window of the series into the token matrix.

    Requires 1 <= C <= floor(L / 2) so an earlier match and its successor
    window can both exist, and scale >= 0 (0 gives uniform attention).
    """
    values = np.asarray(series, dtype=np.float64)
    length = values.size
    if window_len < 1 or window_len > length // 2:
        raise WindowTooLong(
            f"window length {window_len} outside [1, {length // 2}] "
            f"for series length {length}"
        )
    if scale < 0.0:
        raise EmptyInput(f"saturation scale must be >= 0, got {scale}")
    patches = extract_patches(values, window_len)
    num_tokens = len(patches)
    if num_tokens < 2:
        raise NoTokens("the series yields no candidate tokens besides the query")
    pos = make_positional_encodings(num_tokens, window_len)

    dim = window_len + 1 + pos.dim
    split = window_len + 1
    tokens = np.zeros((num_tokens, dim), dtype=np.float64)
    for i, patch in enumerate(patches):
        token = embed_patch(patch)
        tokens[i, :window_len] = token.direction
        tokens[i, window_len] = token.norm
        tokens[i, split:] = pos.vectors[i]

    truncated = tokens[:-1]
    block_norms = np.linalg.norm(truncated[:, :split], axis=1)
    # zero patches have an all-zero token block; any scale works since they
    # score zero against every query, so keep the normalizer finite
    normalizer = 1.0 / np.where(block_norms < 1e-12, 1.0, block_norms)

    token_projection = np.zeros((dim, dim), dtype=np.float64)
    token_projection[np.arange(split), np.arange(split)] = 1.0
    positional_projection = np.eye(dim) - token_projection

    return TsrModel(
        tokens=tokens,
        truncated=truncated,
        normalizer=normalizer,
        token_projection=token_projection,
        positional_projection=positional_projection,
        pos=pos,
        window_len=window_len,
        scale=float(scale),
    )


def solve_tsr(series, window_len: int, scale: float) -> npt.NDArray[np.float64]:
    """Predict the C values after the final window's unique earlier match.

    Returns a length-C vector; trim to the first H entries for H < C.
    Exactness (1e-6 relative at scale 1e4) is promised only when the final
    motif has exactly one exact earlier match.
    """
    return build_tsr_model(series, window_len, scale).solve().prediction

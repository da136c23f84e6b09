"""Client side of the v1 adapter wire protocol.

An adapter is a child process speaking newline-delimited JSON over its
standard input/output, one request frame then one response frame,
strictly alternating:

    {"type": "hello", "v": 1}
        -> {"type": "hello", "capabilities": ["forecast", "embed"?],
            "embed_dim": int?}
    {"type": "forecast", "context": [...], "h": H, "num_samples": S}
        -> {"type": "samples", "samples": [[...] x S]}
    {"type": "embed", "series": [...]}
        -> {"type": "embedding", "embedding": [...]}
    {"type": "error", "message": "..."} aborts the exchange.

Numbers in frames must be finite decimals; NaN/Infinity tokens are
rejected on read. A reader thread plus bounded queue keeps every read
under a timeout so a hung or dead adapter surfaces as AdapterUnavailable
instead of blocking the host forever.
"""
from __future__ import annotations

import json
import queue
import shlex
import subprocess
import threading
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import numpy.typing as npt

from .errors import (
    AdapterRemoteError,
    AdapterUnavailable,
    CapabilityMissing,
    MalformedResponse,
)
from .forecasters import ForecastRequest, ForecastSamples

PROTOCOL_VERSION = 1
DEFAULT_TIMEOUT = 120.0

_CLOSED = object()  # reader-thread sentinel: child stdout reached EOF


def _reject_constant(token: str):
    raise ValueError(f"non-finite JSON token {token!r}")


def _parse_frame(line: str) -> dict:
    try:
        frame = json.loads(line, parse_constant=_reject_constant)
    except ValueError as exc:
        raise MalformedResponse(f"undecodable frame {line[:200]!r}: {exc}") from None
    if not isinstance(frame, dict) or not isinstance(frame.get("type"), str):
        raise MalformedResponse(f"frame is not an object with a 'type': {line[:200]!r}")
    return frame


class AdapterClient:
    """Owns one adapter process and serializes exchanges with it."""

    def __init__(self, command: str | Sequence[str], timeout: float = DEFAULT_TIMEOUT):
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not argv:
            raise AdapterUnavailable("empty adapter command")
        self.command = argv
        self.timeout = timeout
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
            )
        except OSError as exc:
            raise AdapterUnavailable(f"cannot spawn adapter {argv[0]!r}: {exc}") from None
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        self._closed = False
        self.capabilities, self.embed_dim = self._handshake()

    def _pump(self) -> None:
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(_CLOSED)

    def _exchange(self, request: dict) -> dict:
        if self._closed:
            raise AdapterUnavailable("adapter connection already closed")
        payload = json.dumps(request, allow_nan=False)
        try:
            self._proc.stdin.write(payload + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError):
            raise AdapterUnavailable(
                f"adapter {self.command[0]!r} closed its input (exit "
                f"{self._proc.poll()})"
            ) from None
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            raise AdapterUnavailable(
                f"no response from adapter {self.command[0]!r} within "
                f"{self.timeout:g}s"
            ) from None
        if line is _CLOSED:
            raise AdapterUnavailable(
                f"adapter {self.command[0]!r} exited (code {self._proc.poll()}) "
                "mid-exchange"
            )
        frame = _parse_frame(line)
        if frame["type"] == "error":
            raise AdapterRemoteError(str(frame.get("message", "unspecified error")))
        return frame

    def _handshake(self) -> tuple[frozenset[str], int | None]:
        frame = self._exchange({"type": "hello", "v": PROTOCOL_VERSION})
        if frame["type"] != "hello":
            raise MalformedResponse(f"expected hello reply, got type {frame['type']!r}")
        if frame.get("v", PROTOCOL_VERSION) != PROTOCOL_VERSION:
            raise MalformedResponse(f"unsupported protocol version {frame.get('v')!r}")
        caps = frame.get("capabilities")
        if not isinstance(caps, list) or not all(isinstance(c, str) for c in caps):
            raise MalformedResponse("hello reply lacks a capabilities list")
        if "forecast" not in caps:
            raise CapabilityMissing("adapter does not advertise the forecast capability")
        dim = frame.get("embed_dim")
        if dim is not None and (isinstance(dim, bool) or not isinstance(dim, int) or dim < 1):
            raise MalformedResponse(f"bad embed_dim {dim!r} in hello reply")
        return frozenset(caps), dim

    def forecast(
        self,
        context: npt.NDArray[np.float64],
        horizon: int,
        num_samples: int,
    ) -> ForecastSamples:
        frame = self._exchange(
            {
                "type": "forecast",
                "context": np.asarray(context, dtype=np.float64).tolist(),
                "h": int(horizon),
                "num_samples": int(num_samples),
            }
        )
        if frame["type"] != "samples":
            raise MalformedResponse(f"expected samples reply, got type {frame['type']!r}")
        try:
            samples = np.asarray(frame["samples"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedResponse(f"bad samples payload: {exc}") from None
        if samples.ndim != 2 or samples.shape != (num_samples, horizon):
            raise MalformedResponse(
                f"samples shape {samples.shape} != ({num_samples}, {horizon})"
            )
        if not np.isfinite(samples).all():
            raise MalformedResponse("samples contain a non-finite value")
        return ForecastSamples(samples=samples)

    def embed(self, series: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        if "embed" not in self.capabilities:
            raise CapabilityMissing("adapter does not advertise the embed capability")
        frame = self._exchange(
            {"type": "embed", "series": np.asarray(series, dtype=np.float64).tolist()}
        )
        if frame["type"] != "embedding":
            raise MalformedResponse(
                f"expected embedding reply, got type {frame['type']!r}"
            )
        try:
            vec = np.asarray(frame["embedding"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedResponse(f"bad embedding payload: {exc}") from None
        if vec.ndim != 1 or vec.size == 0:
            raise MalformedResponse(f"embedding must be a non-empty vector, got {vec.shape}")
        if not np.isfinite(vec).all():
            raise MalformedResponse("embedding contains a non-finite value")
        if self.embed_dim is None:
            self.embed_dim = int(vec.size)  # pin on first response
        elif vec.size != self.embed_dim:
            raise MalformedResponse(
                f"embedding dimension drifted from {self.embed_dim} to {vec.size}"
            )
        return vec

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        try:
            self._proc.stdin.close()
        except OSError:
            pass
        try:
            self._proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()
        self._reader.join(timeout=5)

    def __enter__(self) -> "AdapterClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def adapter_embed(
    client: AdapterClient, series: npt.NDArray[np.float64]
) -> npt.NDArray[np.float64]:
    """Fetch the external encoder's embedding of a series."""
    return client.embed(series)


class AdapterForecaster:
    """Forecaster facade over an AdapterClient, for make_forecaster."""

    name = "adapter"

    def __init__(self, command: str | Sequence[str], timeout: float = DEFAULT_TIMEOUT):
        self.client = AdapterClient(command, timeout=timeout)

    def forecast(self, request: ForecastRequest) -> ForecastSamples:
        return self.client.forecast(request.context, request.horizon, request.num_samples)

    def close(self) -> None:
        self.client.close()

    def __enter__(self) -> "AdapterForecaster":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


@dataclass(frozen=True)
class ConformanceReport:
    frames_sent: int
    forecast_frames: int
    embed_frames: int
    determinism_rechecks: int
    echo_checked: bool


def run_conformance(
    command: str | Sequence[str],
    num_frames: int = 10_000,
    seed: int = 0,
    expect_echo: bool = False,
    timeout: float = DEFAULT_TIMEOUT,
) -> ConformanceReport:
    """Hammer an adapter with randomized frames and verify every response.

    Every response must be well-formed, correctly shaped, and finite.
    With expect_echo the adapter must follow the loopback rules
    (samples[i][j] == context[(i + j) % len(context)], embedding ==
    series verbatim), checked bit-exactly; JSON float round-trips are
    exact for finite doubles, so any deviation is real corruption.
    Without it, every 100th frame is sent twice and the two responses
    must match bit-for-bit. Raises MalformedResponse on the first
    violation; returns a tally on success.
    """
    rng = np.random.default_rng(seed)
    forecast_frames = 0
    embed_frames = 0
    rechecks = 0
    # one length for all embed frames: the host pins the embedding
    # dimension after the first reply, and an identity-style encoder's
    # dimension follows its input length
    embed_len = int(rng.integers(1, 33))
    with AdapterClient(command, timeout=timeout) as client:
        can_embed = "embed" in client.capabilities
        for i in range(num_frames):
            # mixed magnitudes stress the float round-trip
            scale = 10.0 ** rng.integers(-3, 4)
            if can_embed and rng.integers(0, 4) == 0:
                series = rng.standard_normal(embed_len) * scale
                vec = client.embed(series)
                embed_frames += 1
                if expect_echo and not np.array_equal(vec, series):
                    raise MalformedResponse(
                        f"echo adapter corrupted embedding at frame {i}"
                    )
                if not expect_echo and i % 100 == 0:
                    again = client.embed(series)
                    rechecks += 1
                    if not np.array_equal(vec, again):
                        raise MalformedResponse(
                            f"nondeterministic embedding at frame {i}"
                        )
            else:
                context = rng.standard_normal(int(rng.integers(1, 33))) * scale
                h = int(rng.integers(1, 9))
                num_samples = int(rng.integers(1, 6))
                result = client.forecast(context, h, num_samples)
                forecast_frames += 1
                if expect_echo:
                    rows = np.arange(num_samples)[:, None]
                    cols = np.arange(h)[None, :]
                    expected = context[(rows + cols) % context.size]
                    if not np.array_equal(result.samples, expected):
                        raise MalformedResponse(
                            f"echo adapter corrupted samples at frame {i}"
                        )
                elif i % 100 == 0:
                    again = client.forecast(context, h, num_samples)
                    rechecks += 1
                    if not np.array_equal(result.samples, again.samples):
                        raise MalformedResponse(
                            f"nondeterministic samples at frame {i}"
                        )
    return ConformanceReport(
        frames_sent=forecast_frames + embed_frames + rechecks,
        forecast_frames=forecast_frames,
        embed_frames=embed_frames,
        determinism_rechecks=rechecks,
        echo_checked=expect_echo,
    )

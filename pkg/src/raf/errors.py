"""Exception taxonomy for the toolkit.

Two marker bases split every failure into caller-input problems
(InputError, CLI exit code 1) and execution failures (RuntimeFailure,
CLI exit code 2). Every exception carries a human-readable message.
"""
from __future__ import annotations


class RafError(Exception):
    """Base class for every toolkit error."""


class InputError(RafError):
    """The caller handed us something invalid."""


class RuntimeFailure(RafError):
    """A well-formed request failed during execution."""


# core-series
class EmptyInput(InputError):
    pass


class NonFiniteInput(InputError):
    """A NaN or infinity reached a numeric kernel."""


class WindowTooLong(InputError):
    """Window length C exceeds the series length."""


# retrieval
class EmptyDataset(InputError):
    pass


class NoValidWindows(InputError):
    """Every candidate window was too short or contained a gap."""


class EmptyIndex(InputError):
    pass


class ShortSample(InputError):
    """A sampled trajectory is shorter than the requested horizon."""


# tsr-attention
class NoTokens(InputError):
    """The series yields no database tokens besides the query itself."""


class ZeroNormQuery(InputError):
    """The final motif has zero norm so its direction is undefined."""


# synth-lab
class LengthMismatch(InputError):
    pass


class ZeroTruth(InputError):
    """The truth segment is identically zero so scaled MSE is undefined."""


class SweepAborted(RuntimeFailure):
    """A forecaster error aborted an SNR sweep; carries the failing SNR."""

    def __init__(self, snr: float, cause: Exception):
        super().__init__(f"sweep aborted at snr={snr!r}: {cause}")
        self.snr = snr
        self.cause = cause


# metrics
class AllZeroActuals(RuntimeFailure):
    """The pooled |actual| denominator is zero."""


class DegenerateScale(RuntimeFailure):
    """The seasonal-naive denominator is zero (exactly periodic history)."""


class ZeroBaseline(InputError):
    pass


class QuantileCrossing(InputError):
    """Quantile values decrease in the level at some step."""


class NonPositiveEntry(InputError):
    pass


# forecaster-host / adapter
class AdapterUnavailable(RuntimeFailure):
    """The adapter process is gone, unresponsive, or never came up."""


class AdapterRemoteError(AdapterUnavailable):
    """The adapter answered with an error frame; message preserved."""


class MalformedResponse(RuntimeFailure):
    """The adapter answered with something outside the protocol."""


class ShapeMismatch(RuntimeFailure):
    """A samples matrix does not match (num_samples, horizon)."""


class CapabilityMissing(RuntimeFailure):
    """The adapter's handshake does not advertise the needed capability."""


# bench-cli
class ParseError(InputError):
    """A dataset line failed to parse; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateId(InputError):
    pass


class EmptySeries(InputError):
    pass


class MissingBaselineCell(RuntimeFailure):
    """Aggregation found a raf cell with no baseline partner."""


class ConfigError(InputError):
    pass


__all__ = [
    name
    for name, obj in list(globals().items())
    if isinstance(obj, type) and issubclass(obj, RafError)
]

"""Input checks shared by the estimator wrappers and the CLI."""
from __future__ import annotations

import numbers

import numpy as np

from .codec import as_bits
from .exceptions import ConfigError, InvalidStreamError
from .sensor import EVENT_DTYPE, IntensitySignal

__all__ = ["check_positive", "check_nonneg", "check_packets", "check_pixel_events", "check_signals", "check_stream"]


def check_positive(name: str, value) -> float:
    if not isinstance(value, numbers.Real) or not value > 0:
        raise ConfigError(f"{name} must be a positive number, got {value!r}")
    return float(value)


def check_nonneg(name: str, value) -> float:
    if not isinstance(value, numbers.Real) or value < 0:
        raise ConfigError(f"{name} must be >= 0, got {value!r}")
    return float(value)


def check_packets(X, even: bool = False) -> list:
    """A list of 0/1 packets; accepts bit strings, sequences or a 2-d array."""
    if isinstance(X, (str, bytes)):
        raise ConfigError("expected a collection of packets, got a single string")
    packets = [as_bits(p) for p in X]
    if even:
        bad = [i for i, p in enumerate(packets) if len(p) % 2]
        if bad:
            raise ConfigError(f"packets {bad[:5]} have an odd bit count")
    return packets


def check_pixel_events(ev) -> np.ndarray:
    arr = np.asarray(ev, dtype=np.int64)
    if arr.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidStreamError("pixel events must be an (n, 2) array of (t, polarity)")
    if np.any((arr[:, 1] != 0) & (arr[:, 1] != 1)):
        raise InvalidStreamError("polarity must be 0 or 1")
    if np.any(np.diff(arr[:, 0]) < 0):
        raise InvalidStreamError("events are not sorted by time")
    return arr


def check_signals(X, slot_us: float) -> list:
    """IntensitySignal objects pass through; rows of a 2-d array become
    signals with ``slot_us`` slots."""
    if isinstance(X, IntensitySignal):
        return [X]
    if isinstance(X, np.ndarray) and X.ndim == 2:
        return [IntensitySignal(row, slot_us) for row in X]
    return [x if isinstance(x, IntensitySignal) else IntensitySignal(np.asarray(x, dtype=float), slot_us) for x in X]


def check_stream(stream) -> np.ndarray:
    if not isinstance(stream, np.ndarray) or stream.dtype != EVENT_DTYPE:
        raise InvalidStreamError("expected an event stream array with fields t, x, y, p")
    return stream

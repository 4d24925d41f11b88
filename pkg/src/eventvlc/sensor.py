"""Per-pixel event-camera model.

Each pixel compares its band-filtered log intensity against a reference
level and emits an on (1) or off (0) event when the difference reaches the
corresponding contrast threshold, after which the reference moves to the
current level. A per-pixel dead time suppresses events right after one
fires. Background activity is an independent Poisson process superposed on
top.

Event streams are numpy structured arrays with fields ``t`` (integer us),
``x``, ``y`` and ``p``, kept sorted by ``(t, y, x, p)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, NamedTuple, Optional

import numpy as np
from scipy.signal import lfilter, lfiltic

from .exceptions import ConfigError, InvalidRoIError, InvalidSignalError, InvalidStreamError
from .geometry import BoundingBox, SensorGeometry

logger = logging.getLogger(__name__)

__all__ = [
    "EVENT_DTYPE",
    "Event",
    "SensorBiases",
    "IntensitySignal",
    "empty_stream",
    "make_stream",
    "sort_stream",
    "filter_roi",
    "pixel_events",
    "apply_band_filter",
    "simulate_pixel",
    "simulate_sensor",
    "average_event_rate",
    "write_events_csv",
    "read_events_csv",
]

EVENT_DTYPE = np.dtype([("t", "<i8"), ("x", "<i4"), ("y", "<i4"), ("p", "i1")])


class Event(NamedTuple):
    t: int
    x: int
    y: int
    polarity: int


@dataclass(frozen=True)
class SensorBiases:
    """Contrast thresholds are in natural-log units; cutoffs in Hz."""

    diff_on: float = 0.2
    diff_off: float = 0.2
    f0_cutoff_hz: float = 10_000.0
    hpf_cutoff_hz: float = 10.0
    refractory_us: float = 10.0
    background_rate_hz: float = 0.1

    def __post_init__(self):
        if not self.diff_on > 0 or not self.diff_off > 0:
            raise ConfigError("contrast thresholds must be > 0")
        if not 0 < self.hpf_cutoff_hz < self.f0_cutoff_hz:
            raise ConfigError(
                f"need 0 < hpf_cutoff_hz < f0_cutoff_hz, got {self.hpf_cutoff_hz} / {self.f0_cutoff_hz}"
            )
        if self.refractory_us < 0:
            raise ConfigError("refractory_us must be >= 0")
        if self.background_rate_hz < 0:
            raise ConfigError("background_rate_hz must be >= 0")

    def replace(self, **changes) -> "SensorBiases":
        return SensorBiases(**{**self.__dict__, **changes})


@dataclass(frozen=True, eq=False)
class IntensitySignal:
    """Piecewise-constant intensity: ``samples[i]`` holds over
    ``[t0_us + i*slot_us, t0_us + (i+1)*slot_us)``."""

    samples: np.ndarray
    slot_us: float = 100.0
    t0_us: float = 0.0

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise InvalidSignalError("samples must be one-dimensional")
        object.__setattr__(self, "samples", arr)
        if not self.slot_us > 0:
            raise InvalidSignalError(f"slot_us must be > 0, got {self.slot_us}")

    def __len__(self):
        return len(self.samples)

    @property
    def duration_us(self) -> float:
        return len(self.samples) * self.slot_us

    def is_constant(self) -> bool:
        s = self.samples
        return len(s) == 0 or bool(np.all(s == s[0]))

    def scaled(self, a: float) -> "IntensitySignal":
        return IntensitySignal(self.samples * a, self.slot_us, self.t0_us)


def empty_stream() -> np.ndarray:
    return np.zeros(0, dtype=EVENT_DTYPE)


def sort_stream(stream: np.ndarray) -> np.ndarray:
    order = np.lexsort((stream["p"], stream["x"], stream["y"], stream["t"]))
    return stream[order]


def make_stream(t, x, y, p, *, sort=True) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=np.int64))
    out = np.empty(len(t), dtype=EVENT_DTYPE)
    out["t"] = t
    out["x"] = x
    out["y"] = y
    out["p"] = p
    return sort_stream(out) if sort else out


def filter_roi(stream: np.ndarray, roi: Optional[BoundingBox]) -> np.ndarray:
    if roi is None:
        return stream
    return stream[roi.contains(stream["x"], stream["y"])]


def pixel_events(stream: np.ndarray, x: int, y: int) -> np.ndarray:
    """``(n, 2)`` array of ``(t, p)`` for one pixel, in stream order."""
    sel = stream[(stream["x"] == x) & (stream["y"] == y)]
    return np.column_stack([sel["t"].astype(np.int64), sel["p"].astype(np.int64)])


def _decay(cutoff_hz: float, dt_us: float) -> float:
    tau_us = 1e6 / (2.0 * math.pi * cutoff_hz)
    return math.exp(-dt_us / tau_us)


def _first_order_lowpass(x: np.ndarray, e: float) -> np.ndarray:
    b = [0.0, 1.0 - e]
    a = [1.0, -e]
    zi = lfiltic(b, a, y=[x[0]], x=[x[0]])
    y, _ = lfilter(b, a, x, zi=zi)
    return y


def apply_band_filter(signal: IntensitySignal, biases: SensorBiases) -> IntensitySignal:
    """Low-pass at ``f0_cutoff_hz`` followed by high-pass at ``hpf_cutoff_hz``.

    ``signal`` carries log intensity sampled every ``slot_us``. Both stages
    start in steady state for the first sample, so a constant input maps to
    an all-zero output.
    """
    x = signal.samples
    if len(x) == 0:
        return signal
    if not np.all(np.isfinite(x)):
        raise InvalidSignalError("signal contains non-finite samples")
    lp = _first_order_lowpass(x, _decay(biases.f0_cutoff_hz, signal.slot_us))
    slow = _first_order_lowpass(lp, _decay(biases.hpf_cutoff_hz, signal.slot_us))
    return IntensitySignal(lp - slow, signal.slot_us, signal.t0_us)


def _log_samples(signal: IntensitySignal) -> np.ndarray:
    s = signal.samples
    if not np.all(np.isfinite(s)):
        raise InvalidSignalError("signal contains non-finite samples")
    if np.any(s <= 0):
        raise InvalidSignalError("intensity must be > 0 where the log is evaluated")
    return np.log(s)


def _signal_events(signal: IntensitySignal, biases: SensorBiases, dt_us: float) -> np.ndarray:
    if len(signal) == 0 or signal.is_constant():
        return np.zeros((0, 2), dtype=np.int64)
    from ._kernels import pixel_events as _kernel

    logs = _log_samples(signal)
    times, pols = _kernel(
        logs,
        float(signal.slot_us),
        float(dt_us),
        _decay(biases.f0_cutoff_hz, dt_us),
        _decay(biases.hpf_cutoff_hz, dt_us),
        float(biases.diff_on),
        float(biases.diff_off),
        float(biases.refractory_us),
    )
    t = np.floor(signal.t0_us + times + 0.5).astype(np.int64)
    return np.column_stack([t, pols.astype(np.int64)])


def _noise_events(signal: IntensitySignal, rate_hz: float, rng: np.random.Generator) -> np.ndarray:
    if rate_hz <= 0 or len(signal) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if not isinstance(rng, np.random.Generator):
        rng = rng()
    span = signal.duration_us
    n = rng.poisson(rate_hz * span * 1e-6)
    t = np.floor(signal.t0_us + rng.uniform(0.0, span, n)).astype(np.int64)
    p = rng.integers(0, 2, n)
    return np.column_stack([t, p.astype(np.int64)])


def _merge(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if len(b) == 0:
        return a
    out = np.concatenate([a, b])
    return out[np.lexsort((out[:, 1], out[:, 0]))]


def simulate_pixel(
    signal: IntensitySignal,
    biases: SensorBiases = SensorBiases(),
    seed: int = 0,
    dt_us: float = 1.0,
) -> np.ndarray:
    """Events of a single pixel as an ``(n, 2)`` int array of ``(t_us, polarity)``.

    ``dt_us`` is the internal integration step; event times land on this
    grid and are rounded to whole microseconds.
    """
    if len(signal) == 0:
        raise InvalidSignalError("signal is empty")
    det = _signal_events(signal, biases, dt_us)
    noise = _noise_events(signal, biases.background_rate_hz, np.random.default_rng(seed))
    return _merge(det, noise)


def _pixel_rng(seed: int, x: int, y: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(x), int(y)]))


def simulate_sensor(
    field: Mapping[tuple, IntensitySignal],
    biases: SensorBiases = SensorBiases(),
    geometry: SensorGeometry = SensorGeometry(),
    roi: Optional[BoundingBox] = None,
    seed: int = 0,
    dt_us: float = 1.0,
) -> np.ndarray:
    """Simulate every pixel of ``field`` (keyed by ``(x, y)``) and merge.

    Pixels outside ``roi`` are not read out at all. The deterministic part is
    computed once per distinct signal; noise draws use a generator seeded
    from ``(seed, x, y)`` so results do not depend on iteration order.
    """
    if roi is not None and not roi.inside(geometry):
        raise InvalidRoIError(f"{roi} lies outside {geometry}")
    cache = {}
    chunks = []
    for key in field:
        x, y = key
        if not geometry.contains(x, y):
            raise InvalidRoIError(f"pixel ({x}, {y}) outside {geometry}")
        if roi is not None and not roi.contains(x, y):
            continue
        sig = field[key]
        if len(sig) == 0:
            continue
        key = id(sig)
        if key not in cache:
            det = _signal_events(sig, biases, dt_us)
            cache[key] = (sig, det)  # keep sig alive so id() stays unique
        det = cache[key][1]
        noise = _noise_events(sig, biases.background_rate_hz, lambda: _pixel_rng(seed, x, y))
        ev = _merge(det, noise)
        if len(ev):
            chunk = np.empty(len(ev), dtype=EVENT_DTYPE)
            chunk["t"] = ev[:, 0]
            chunk["p"] = ev[:, 1]
            chunk["x"] = x
            chunk["y"] = y
            chunks.append(chunk)
    if not chunks:
        return empty_stream()
    return sort_stream(np.concatenate(chunks))


def average_event_rate(stream: np.ndarray, duration_us: float) -> float:
    """Events per second."""
    if duration_us <= 0:
        raise ValueError("duration_us must be > 0")
    return len(stream) / (duration_us * 1e-6)


def write_events_csv(stream: np.ndarray, path) -> None:
    path = Path(path)
    stream = sort_stream(stream)
    arr = np.column_stack([stream["t"], stream["x"], stream["y"], stream["p"]]).astype(np.int64)
    tmp = path.with_suffix(path.suffix + ".tmp")
    np.savetxt(tmp, arr, fmt="%d", delimiter=",", header="t_us,x,y,p", comments="")
    tmp.replace(path)


def read_events_csv(path) -> np.ndarray:
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().strip()
    if header != "t_us,x,y,p":
        raise InvalidStreamError(f"{path}: unexpected header {header!r}")
    arr = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    if arr.size == 0:
        return empty_stream()
    if np.any((arr[:, 3] != 0) & (arr[:, 3] != 1)):
        raise InvalidStreamError(f"{path}: polarity must be 0 or 1")
    return make_stream(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3])

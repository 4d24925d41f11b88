"""Periodic event frames and hot-pixel selection."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .exceptions import NoSignalError
from .geometry import BoundingBox, SensorGeometry
from .sensor import filter_roi

__all__ = [
    "EventFrame",
    "frame_times",
    "periodic_frames",
    "accumulate",
    "hot_pixel",
    "pixel_counts",
    "write_pgm",
    "read_pgm",
]


@dataclass(frozen=True, eq=False)
class EventFrame:
    """``counts[y, x]`` events in ``[t_frame_us - accumulation_us, t_frame_us)``.

    ``counts_on`` / ``counts_off`` are filled only for polarity-split frames.
    """

    width: int
    height: int
    counts: np.ndarray
    t_frame_us: float
    accumulation_us: float = 0.0
    counts_on: Optional[np.ndarray] = None
    counts_off: Optional[np.ndarray] = None

    @property
    def window(self) -> Tuple[float, float]:
        return (self.t_frame_us - self.accumulation_us, self.t_frame_us)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def _fps(fps) -> Fraction:
    f = Fraction(fps).limit_denominator(10**6) if isinstance(fps, float) else Fraction(fps)
    if f <= 0:
        raise ValueError("fps must be > 0")
    return f


def frame_times(duration_us: float, fps) -> List[Fraction]:
    """Emission times ``k / fps`` for ``k = 1 .. ceil(duration * fps)``.

    The first frame closes one period after t = 0 and the last one at or
    just past the end of the recording, so a 1 s stream at 10 fps gives
    exactly 10 frames.
    """
    f = _fps(fps)
    period = Fraction(10**6) / f
    n = math.ceil(Fraction(duration_us) / period)
    return [k * period for k in range(1, n + 1)]


def accumulate(stream: np.ndarray, geometry: SensorGeometry, polarity: Optional[int] = None) -> np.ndarray:
    """Per-pixel event totals of ``stream`` as an ``(h, w)`` array."""
    if polarity is not None:
        stream = stream[stream["p"] == polarity]
    flat = stream["y"].astype(np.int64) * geometry.width + stream["x"].astype(np.int64)
    return np.bincount(flat, minlength=geometry.width * geometry.height).reshape(geometry.height, geometry.width)


def periodic_frames(
    stream: np.ndarray,
    accumulation_us: float,
    fps,
    geometry: SensorGeometry = SensorGeometry(),
    duration_us: Optional[float] = None,
    roi: Optional[BoundingBox] = None,
    split_polarity: bool = False,
) -> List[EventFrame]:
    """Accumulate ``stream`` into frames emitted every ``1 / fps`` seconds.

    ``duration_us`` defaults to just past the last event. Windows overlap
    when the frame period is shorter than ``accumulation_us``.
    """
    if not accumulation_us > 0:
        raise ValueError("accumulation_us must be > 0")
    stream = filter_roi(stream, roi)
    t = stream["t"]
    if not np.all(t[1:] >= t[:-1]):
        stream = stream[np.argsort(t, kind="stable")]
        t = stream["t"]
    # a strided field view would be copied on every search
    t = np.ascontiguousarray(t)
    if duration_us is None:
        duration_us = int(t[-1]) + 1 if len(t) else 0
    frames = []
    acc = Fraction(accumulation_us)
    for tk in frame_times(duration_us, fps):
        # integer timestamps: tk - acc <= t < tk
        lo = np.searchsorted(t, math.ceil(tk - acc), side="left")
        hi = np.searchsorted(t, math.ceil(tk), side="left")
        part = stream[lo:hi]
        counts = accumulate(part, geometry)
        on = off = None
        if split_polarity:
            on = accumulate(part, geometry, 1)
            off = counts - on
        frames.append(EventFrame(geometry.width, geometry.height, counts, float(tk), float(acc), on, off))
    return frames


def pixel_counts(stream: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unique pixels sorted by ``(y, x)`` and their event counts."""
    key = (stream["y"].astype(np.int64) << 32) | stream["x"].astype(np.int64)
    uniq, counts = np.unique(key, return_counts=True)
    return (uniq & 0xFFFFFFFF), (uniq >> 32), counts


def hot_pixel(stream: np.ndarray, roi: Optional[BoundingBox] = None) -> Tuple[int, int]:
    """The ``(x, y)`` with the most events; ties go to the smallest ``(y, x)``."""
    sub = filter_roi(stream, roi)
    if len(sub) == 0:
        raise NoSignalError("no events inside the region")
    xs, ys, counts = pixel_counts(sub)
    k = int(np.argmax(counts))
    return int(xs[k]), int(ys[k])


def write_pgm(frame: EventFrame, path) -> None:
    """Plain (P2) PGM of the raw counts; values above 65535 are clipped."""
    counts = np.minimum(frame.counts, 65535)
    maxval = max(int(counts.max()) if counts.size else 0, 1)
    lines = ["P2", f"# t_us={frame.t_frame_us:g} acc_us={frame.accumulation_us:g}", f"{frame.width} {frame.height}", str(maxval)]
    lines.extend(" ".join(map(str, row)) for row in counts.tolist())
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text("\n".join(lines) + "\n")
    tmp.replace(path)


def read_pgm(path) -> EventFrame:
    t_us = acc = 0.0
    tokens = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            for item in line[1:].split():
                k, _, v = item.partition("=")
                if k == "t_us":
                    t_us = float(v)
                elif k == "acc_us":
                    acc = float(v)
            continue
        tokens.extend(line.split())
    if not tokens or tokens[0] != "P2":
        raise ValueError(f"{path}: not a plain PGM file")
    w, h = int(tokens[1]), int(tokens[2])
    values = np.array(tokens[4 : 4 + w * h], dtype=np.int64)
    if len(values) != w * h:
        raise ValueError(f"{path}: expected {w * h} values, got {len(values)}")
    return EventFrame(w, h, values.reshape(h, w), t_us, acc)

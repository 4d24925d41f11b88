"""Optical path: transmitter waveform, surface reflection and ambient light.

A scene is rendered into a per-pixel field of :class:`IntensitySignal` on a
common slot grid. Object pixels see the reflected transmitter plus ambient
light; all other pixels see ambient light only.
"""
from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from .codec import PulseString
from .exceptions import ConfigError, InvalidSignalError
from .geometry import BoundingBox, SensorGeometry
from .sensor import IntensitySignal

__all__ = [
    "TransmitterWaveform",
    "SurfaceProfile",
    "AmbientLight",
    "SceneSpec",
    "SceneField",
    "waveform_to_signal",
    "reflect",
    "compose_scene",
    "disc_mask",
    "rect_mask",
    "mask_bbox",
]


@dataclass(frozen=True)
class TransmitterWaveform:
    """``noise_rel`` is the relative intensity noise of the emitter: each
    on slot is scaled by ``1 + noise_rel * N(0, 1)``, common to every pixel
    that sees the emitter. Off slots are noiseless (no drive current)."""

    pulse_string: PulseString
    slot_us: float = 100.0
    on_level: float = 1.0
    off_level: float = 0.1
    noise_rel: float = 0.0

    def __post_init__(self):
        if not self.on_level > self.off_level >= 0:
            raise ConfigError(f"need on_level > off_level >= 0, got {self.on_level} / {self.off_level}")
        if not self.slot_us > 0:
            raise ConfigError("slot_us must be > 0")
        if self.noise_rel < 0:
            raise ConfigError("noise_rel must be >= 0")


@dataclass(frozen=True)
class SurfaceProfile:
    reflectivity: float = 1.0
    gloss: float = 1.0
    multipath_taps: Tuple[Tuple[float, float], ...] = ()
    label: str = "custom"
    matte_spread_us: float = 300.0

    def __post_init__(self):
        taps = tuple((float(d), float(g)) for d, g in self.multipath_taps)
        object.__setattr__(self, "multipath_taps", taps)
        if not 0 <= self.reflectivity <= 1:
            raise ConfigError(f"reflectivity must be in [0, 1], got {self.reflectivity}")
        if not 0 <= self.gloss <= 1:
            raise ConfigError(f"gloss must be in [0, 1], got {self.gloss}")
        if any(d < 0 or g < 0 for d, g in taps):
            raise ConfigError("tap delays and gains must be >= 0")
        if sum(g for _, g in taps) > 1 + 1e-12:
            raise ConfigError("tap gains must sum to at most 1")
        if self.matte_spread_us < 0:
            raise ConfigError("matte_spread_us must be >= 0")


@dataclass(frozen=True)
class AmbientLight:
    dc_level: float = 0.0
    flicker_hz: float = 120.0
    flicker_amplitude: float = 0.0
    shot_noise_sigma: float = 0.0

    def __post_init__(self):
        if self.dc_level < 0:
            raise ConfigError("dc_level must be >= 0")
        if not 0 <= self.flicker_amplitude <= self.dc_level:
            raise ConfigError("flicker_amplitude must lie in [0, dc_level]")
        if self.shot_noise_sigma < 0:
            raise ConfigError("shot_noise_sigma must be >= 0")
        if self.flicker_hz < 0:
            raise ConfigError("flicker_hz must be >= 0")


@dataclass(frozen=True, eq=False)
class SceneSpec:
    geometry: SensorGeometry
    object_mask: np.ndarray
    surface: SurfaceProfile
    ambient: AmbientLight
    transmitter: TransmitterWaveform

    def __post_init__(self):
        mask = np.asarray(self.object_mask, dtype=bool)
        if mask.shape != (self.geometry.height, self.geometry.width):
            raise ConfigError(
                f"object_mask shape {mask.shape} does not match geometry "
                f"{(self.geometry.height, self.geometry.width)}"
            )
        object.__setattr__(self, "object_mask", mask)


def waveform_to_signal(w: TransmitterWaveform, t0_us: float = 0.0) -> IntensitySignal:
    if len(w.pulse_string) == 0:
        raise InvalidSignalError("empty pulse string")
    on = w.pulse_string.to_array().astype(bool)
    return IntensitySignal(np.where(on, w.on_level, w.off_level), w.slot_us, t0_us)


def _delayed(x: np.ndarray, k: int) -> np.ndarray:
    if k <= 0:
        return x
    if k >= len(x):
        return np.full_like(x, x[0])
    return np.concatenate([np.full(k, x[0]), x[:-k]])


def _box_blur(x: np.ndarray, width: int) -> np.ndarray:
    """Causal moving average over ``width`` slots, padding with ``x[0]``."""
    if width <= 1:
        return x.copy()
    padded = np.concatenate([np.full(width - 1, x[0]), x])
    c = np.cumsum(np.concatenate([[0.0], padded]))
    return (c[width:] - c[:-width]) / width


def reflect(signal: IntensitySignal, surface: SurfaceProfile) -> IntensitySignal:
    """Specular copy, matte blur and discrete echoes; delays snap to the slot grid."""
    x = signal.samples
    if len(x) == 0:
        raise InvalidSignalError("empty signal")
    slot = signal.slot_us
    out = surface.gloss * x
    if surface.gloss < 1:
        width = int(round(surface.matte_spread_us / slot))
        out = out + (1 - surface.gloss) * _box_blur(x, width)
    out = surface.reflectivity * out
    for delay, gain in surface.multipath_taps:
        if gain:
            out = out + gain * _delayed(x, int(round(delay / slot)))
    return IntensitySignal(out, slot, signal.t0_us)


def disc_mask(geometry: SensorGeometry, cx: float, cy: float, r: float) -> np.ndarray:
    yy, xx = np.mgrid[: geometry.height, : geometry.width]
    return (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r


def rect_mask(geometry: SensorGeometry, box: BoundingBox) -> np.ndarray:
    mask = np.zeros((geometry.height, geometry.width), dtype=bool)
    mask[box.y : box.y1, box.x : box.x1] = True
    return mask


def mask_bbox(mask: np.ndarray) -> Optional[BoundingBox]:
    ys, xs = np.nonzero(mask)
    if len(xs) == 0:
        return None
    return BoundingBox(int(xs.min()), int(ys.min()), int(xs.max() - xs.min() + 1), int(ys.max() - ys.min() + 1))


class SceneField(Mapping):
    """Lazy ``(x, y) -> IntensitySignal`` map over every sensor pixel.

    Pixels that share a noiseless signal share the same object, so the
    sensor can reuse its deterministic simulation. Per-pixel ambient noise
    is drawn from a generator keyed by ``(seed, x, y)``; the result does not
    depend on the order in which pixels are requested.
    """

    def __init__(self, scene: SceneSpec, reflected: Optional[np.ndarray], ambient: np.ndarray, slot_us: float, seed: int):
        self.scene = scene
        self.slot_us = slot_us
        self.seed = seed
        self._reflected = reflected
        self._ambient = ambient
        self._sigma = scene.ambient.shot_noise_sigma
        g = scene.geometry
        self._shape = (g.height, g.width)
        self._shared_bg = None
        self._shared_obj = None

    def __len__(self):
        return self._shape[0] * self._shape[1]

    def __iter__(self) -> Iterator[Tuple[int, int]]:
        h, w = self._shape
        for y in range(h):
            for x in range(w):
                yield (x, y)

    def __contains__(self, key):
        try:
            x, y = key
        except (TypeError, ValueError):
            return False
        return 0 <= y < self._shape[0] and 0 <= x < self._shape[1]

    def is_object(self, x: int, y: int) -> bool:
        return bool(self.scene.object_mask[y, x])

    def _ambient_for(self, x: int, y: int) -> np.ndarray:
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, 1, x, y]))
        noise = rng.normal(0.0, self._sigma, len(self._ambient))
        return np.maximum(self._ambient + noise, 0.0)

    def _make(self, samples: np.ndarray) -> IntensitySignal:
        return IntensitySignal(samples, self.slot_us, 0.0)

    def __getitem__(self, key) -> IntensitySignal:
        if key not in self:
            raise KeyError(key)
        x, y = int(key[0]), int(key[1])
        obj = self._reflected is not None and self.is_object(x, y)
        if self._sigma > 0:
            amb = self._ambient_for(x, y)
            return self._make(amb + self._reflected if obj else amb)
        if obj:
            if self._shared_obj is None:
                self._shared_obj = self._make(self._ambient + self._reflected)
            return self._shared_obj
        if self._shared_bg is None:
            self._shared_bg = self._make(self._ambient.copy())
        return self._shared_bg

    def object_pixels(self):
        ys, xs = np.nonzero(self.scene.object_mask)
        return list(zip(xs.tolist(), ys.tolist()))

    def restricted(self, pixels) -> dict:
        return {p: self[p] for p in pixels}


def _tiled_slots(p: PulseString, n_slots: int) -> np.ndarray:
    base = p.to_array()
    reps = -(-n_slots // len(base))
    return np.tile(base, reps)[:n_slots]


def compose_scene(scene: SceneSpec, duration_us: Optional[float] = None, seed: int = 0) -> SceneField:
    """Render ``scene`` on the transmitter's slot grid.

    The pulse string is repeated to fill ``duration_us`` (and truncated at
    the end); ``None`` means exactly one repetition.
    """
    tx = scene.transmitter
    slot = tx.slot_us
    if len(tx.pulse_string) == 0:
        raise InvalidSignalError("empty pulse string")
    n_slots = len(tx.pulse_string) if duration_us is None else int(math.ceil(duration_us / slot - 1e-9))
    if n_slots <= 0:
        raise ConfigError("duration_us must cover at least one slot")
    on = _tiled_slots(tx.pulse_string, n_slots).astype(bool)
    level = np.where(on, tx.on_level, tx.off_level)
    if tx.noise_rel > 0:
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
        jitter = np.where(on, tx.noise_rel * rng.standard_normal(n_slots), 0.0)
        level = np.maximum(level * (1.0 + jitter), 0.0)
    reflected = None
    if scene.object_mask.any():
        reflected = reflect(IntensitySignal(level, slot), scene.surface).samples

    amb = scene.ambient
    ambient = np.full(n_slots, float(amb.dc_level))
    if amb.flicker_amplitude > 0 and amb.flicker_hz > 0:
        t_mid = (np.arange(n_slots) + 0.5) * slot * 1e-6
        ambient = ambient + amb.flicker_amplitude * np.sin(2 * np.pi * amb.flicker_hz * t_mid)
    return SceneField(scene, reflected, ambient, slot, seed)

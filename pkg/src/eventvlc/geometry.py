from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidRoIError

__all__ = ["SensorGeometry", "BoundingBox"]


@dataclass(frozen=True)
class SensorGeometry:
    width: int = 1280
    height: int = 720

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"geometry must be positive, got {self.width}x{self.height}")

    def contains(self, x, y):
        return 0 <= x < self.width and 0 <= y < self.height


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box; ``(x, y)`` is the top-left pixel, extent ``w`` x ``h``."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise InvalidRoIError(f"box extent must be positive, got w={self.w} h={self.h}")

    @property
    def area(self) -> int:
        return self.w * self.h

    @property
    def x1(self) -> int:
        return self.x + self.w

    @property
    def y1(self) -> int:
        return self.y + self.h

    def contains(self, x, y):
        """Vectorised membership test (works on scalars and arrays)."""
        x = np.asarray(x)
        y = np.asarray(y)
        return (x >= self.x) & (x < self.x1) & (y >= self.y) & (y < self.y1)

    def inside(self, geometry: SensorGeometry) -> bool:
        return self.x >= 0 and self.y >= 0 and self.x1 <= geometry.width and self.y1 <= geometry.height

    def shifted(self, dx: int, dy: int) -> "BoundingBox":
        return BoundingBox(self.x + dx, self.y + dy, self.w, self.h)

    def as_tuple(self):
        return (self.x, self.y, self.w, self.h)

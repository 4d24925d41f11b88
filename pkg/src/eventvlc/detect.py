"""RoI refinement on event frames."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
from scipy import ndimage

from .framing import EventFrame
from .geometry import BoundingBox

__all__ = [
    "binarize",
    "to_grayscale",
    "largest_contour_bbox",
    "iou",
    "detect_roi",
    "write_annotations",
    "read_annotations",
]

_EIGHT = np.ones((3, 3), dtype=bool)


def _counts(frame: Union[EventFrame, np.ndarray]) -> np.ndarray:
    return frame.counts if isinstance(frame, EventFrame) else np.asarray(frame)


def to_grayscale(frame, cap: int = 5) -> np.ndarray:
    """Counts mapped to 0..255, saturating at ``cap`` events."""
    if cap <= 0:
        raise ValueError("cap must be > 0")
    c = np.minimum(_counts(frame), cap)
    return c * (255.0 / cap)


def binarize(frame, threshold: float = 50, cap: int = 5) -> np.ndarray:
    """Pixels whose grayscale level reaches ``threshold`` (``>=``)."""
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    return to_grayscale(frame, cap) >= threshold


def largest_contour_bbox(binary: np.ndarray) -> Optional[BoundingBox]:
    """Tight box of the 8-connected component with the most pixels.

    Equal areas resolve to the component whose first pixel comes first in
    row-major order. Returns ``None`` for an empty image.
    """
    img = np.asarray(binary, dtype=bool)
    labels, n = ndimage.label(img, structure=_EIGHT)
    if n == 0:
        return None
    areas = np.bincount(labels.ravel())[1:]
    best = int(np.argmax(areas)) + 1
    sy, sx = ndimage.find_objects(labels)[best - 1]
    return BoundingBox(sx.start, sy.start, sx.stop - sx.start, sy.stop - sy.start)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    iw = min(a.x1, b.x1) - max(a.x, b.x)
    ih = min(a.y1, b.y1) - max(a.y, b.y)
    inter = max(iw, 0) * max(ih, 0)
    union = a.area + b.area - inter
    return inter / union


def detect_roi(frame, threshold: float = 50, cap: int = 5) -> Optional[BoundingBox]:
    return largest_contour_bbox(binarize(frame, threshold, cap))


def write_annotations(boxes: Dict[str, Optional[BoundingBox]], path) -> None:
    """``label,x,y,w,h`` rows; a missing box is written with empty fields."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "x", "y", "w", "h"])
        for label, box in boxes.items():
            w.writerow([label, *box.as_tuple()] if box is not None else [label, "", "", "", ""])


def read_annotations(path) -> Dict[str, Optional[BoundingBox]]:
    out = {}
    with open(path, newline="") as fh:
        r = csv.DictReader(fh)
        if r.fieldnames != ["label", "x", "y", "w", "h"]:
            raise ValueError(f"{path}: expected header label,x,y,w,h")
        for row in r:
            if row["x"] == "":
                out[row["label"]] = None
            else:
                out[row["label"]] = BoundingBox(int(row["x"]), int(row["y"]), int(row["w"]), int(row["h"]))
    return out

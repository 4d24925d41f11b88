from collections import deque

import numpy as np
import pytest

from eventvlc.detect import binarize, detect_roi, iou, largest_contour_bbox, read_annotations, to_grayscale, write_annotations
from eventvlc.framing import EventFrame
from eventvlc.geometry import BoundingBox


def bfs_largest_box(img):
    """Breadth-first 8-connected labelling; ties keep the first component met in row-major order."""
    h, w = img.shape
    seen = np.zeros_like(img, dtype=bool)
    best = None
    for y in range(h):
        for x in range(w):
            if not img[y, x] or seen[y, x]:
                continue
            q = deque([(y, x)])
            seen[y, x] = True
            pts = []
            while q:
                cy, cx = q.popleft()
                pts.append((cy, cx))
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        ny, nx = cy + dy, cx + dx
                        if 0 <= ny < h and 0 <= nx < w and img[ny, nx] and not seen[ny, nx]:
                            seen[ny, nx] = True
                            q.append((ny, nx))
            if best is None or len(pts) > len(best):
                best = pts
    if best is None:
        return None
    ys = [p[0] for p in best]
    xs = [p[1] for p in best]
    return BoundingBox(min(xs), min(ys), max(xs) - min(xs) + 1, max(ys) - min(ys) + 1)


def test_binarize_examples():
    assert not binarize(np.zeros((5, 5))).any()
    counts = np.zeros((6, 6), int)
    counts[1:3, 2:5] = 40
    assert np.array_equal(binarize(counts), counts > 0)


def test_binarize_threshold_boundary():
    # one event with cap 5 maps to 51
    one = np.array([[1]])
    assert to_grayscale(one)[0, 0] == 51
    assert binarize(one, threshold=51)[0, 0]
    assert not binarize(one, threshold=51.0001)[0, 0]
    assert binarize(np.array([[10]]), threshold=255)[0, 0]


def test_binarize_accepts_frames():
    f = EventFrame(3, 2, np.array([[0, 1, 0], [0, 0, 7]]), 0.0)
    assert binarize(f).tolist() == [[False, True, False], [False, False, True]]


def test_largest_contour_examples():
    img = np.zeros((30, 30), bool)
    img[5:15, 5:15] = True
    assert largest_contour_bbox(img) == BoundingBox(5, 5, 10, 10)
    img[20:23, 20:23] = True
    assert largest_contour_bbox(img) == BoundingBox(5, 5, 10, 10)
    assert largest_contour_bbox(np.zeros((4, 4), bool)) is None


def test_diagonal_pixels_connect():
    img = np.eye(5, dtype=bool)
    assert largest_contour_bbox(img) == BoundingBox(0, 0, 5, 5)


def test_matches_bfs_oracle():
    rng = np.random.default_rng(0)
    for _ in range(200):
        img = rng.random((12, 15)) < rng.uniform(0.05, 0.5)
        assert largest_contour_bbox(img) == bfs_largest_box(img)


def test_translation_equivariance():
    rng = np.random.default_rng(1)
    for _ in range(50):
        small = rng.random((8, 8)) < 0.4
        dx, dy = (int(v) for v in rng.integers(0, 10, 2))
        img = np.zeros((20, 20), bool)
        img[2:10, 2:10] = small
        shifted = np.zeros((20, 20), bool)
        shifted[2 + dy : 10 + dy, 2 + dx : 10 + dx] = small
        a = largest_contour_bbox(img)
        b = largest_contour_bbox(shifted)
        assert (a is None and b is None) or b == a.shifted(dx, dy)


def test_iou_examples():
    a = BoundingBox(0, 0, 10, 10)
    assert iou(a, a) == 1.0
    assert iou(a, BoundingBox(20, 20, 5, 5)) == 0.0
    assert iou(a, BoundingBox(10, 0, 5, 5)) == 0.0
    assert iou(a, BoundingBox(5, 0, 10, 10)) == pytest.approx(1 / 3)


def test_iou_axioms():
    rng = np.random.default_rng(2)
    for _ in range(500):
        a = BoundingBox(*(int(v) for v in rng.integers(0, 20, 2)), *(int(v) for v in rng.integers(1, 15, 2)))
        b = BoundingBox(*(int(v) for v in rng.integers(0, 20, 2)), *(int(v) for v in rng.integers(1, 15, 2)))
        assert iou(a, b) == iou(b, a)
        assert 0.0 <= iou(a, b) <= 1.0
        assert iou(a, a) == 1.0


def test_box_invariants():
    with pytest.raises(ValueError):
        BoundingBox(0, 0, 0, 3)


def test_detect_roi_on_frame():
    counts = np.zeros((10, 10), int)
    counts[2:6, 3:8] = 9
    counts[8, 8] = 9
    assert detect_roi(EventFrame(10, 10, counts, 0.0)) == BoundingBox(3, 2, 5, 4)


def test_annotation_round_trip(tmp_path):
    boxes = {"truth": BoundingBox(1, 2, 3, 4), "detected": None}
    p = tmp_path / "a.csv"
    write_annotations(boxes, p)
    assert p.read_text().splitlines()[0] == "label,x,y,w,h"
    assert read_annotations(p) == boxes

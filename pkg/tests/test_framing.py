import itertools

import numpy as np
import pytest

from eventvlc.exceptions import NoSignalError
from eventvlc.framing import EventFrame, frame_times, hot_pixel, periodic_frames, read_pgm, write_pgm
from eventvlc.geometry import BoundingBox, SensorGeometry
from eventvlc.sensor import empty_stream, make_stream

G = SensorGeometry(6, 4)


def random_stream(rng, n, duration_us, g=G):
    return make_stream(rng.integers(0, duration_us, n), rng.integers(0, g.width, n), rng.integers(0, g.height, n), rng.integers(0, 2, n))


def test_one_second_ten_fps_tiles():
    rng = np.random.default_rng(0)
    s = random_stream(rng, 500, 1_000_000)
    frames = periodic_frames(s, 100_000, 10, G, duration_us=1_000_000)
    assert len(frames) == 10
    assert [f.window for f in frames] == [(k * 1e5, (k + 1) * 1e5) for k in range(10)]
    assert sum(f.total for f in frames) == len(s)


def test_overlapping_windows():
    s = make_stream([60_000], 1, 1, 1)
    frames = periodic_frames(s, 100_000, 20, G, duration_us=1_000_000)
    hits = [f.t_frame_us for f in frames if f.total]
    assert hits == [100_000, 150_000]
    w = [f.window for f in frames]
    assert all(b0 - a0 == 50_000 and b1 - a1 == 50_000 for (a0, a1), (b0, b1) in zip(w, w[1:]))


def test_window_half_open():
    s = make_stream([99_999, 100_000], [0, 1], 0, 1)
    f = periodic_frames(s, 100_000, 10, G, duration_us=200_000)
    assert f[0].counts[0, 0] == 1 and f[0].counts[0, 1] == 0
    assert f[1].counts[0, 1] == 1


def test_empty_stream_frames_are_zero():
    frames = periodic_frames(empty_stream(), 50_000, 10, G, duration_us=300_000)
    assert len(frames) == 3
    assert all(f.total == 0 and f.counts.shape == (4, 6) for f in frames)


def test_frame_count_convention():
    assert len(frame_times(1_000_000, 10)) == 10
    assert len(frame_times(1_050_000, 10)) == 11
    assert len(frame_times(3_000_000, 30)) == 90
    assert frame_times(100, 1e4)[-1] == 100


def test_count_conservation_randomized():
    rng = np.random.default_rng(1)
    for _ in range(20):
        s = random_stream(rng, int(rng.integers(0, 300)), 400_000)
        acc = float(rng.choice([10_000, 33_333, 75_000, 120_000]))
        fps = float(rng.choice([5, 12.5, 30]))
        roi = BoundingBox(1, 1, 3, 2) if rng.random() < 0.5 else None
        for f in periodic_frames(s, acc, fps, G, duration_us=400_000, roi=roi):
            lo, hi = f.window
            inside = (s["t"] >= lo) & (s["t"] < hi)
            if roi is not None:
                inside &= roi.contains(s["x"], s["y"])
            assert f.total == int(inside.sum())
            assert np.all(f.counts >= 0)


def test_split_polarity():
    s = make_stream([1, 2, 3], [0, 0, 1], 0, [1, 0, 1])
    (f,) = periodic_frames(s, 100, 1e4, G, duration_us=100, split_polarity=True)
    assert f.counts_on[0].tolist()[:2] == [1, 1]
    assert f.counts_off[0].tolist()[:2] == [1, 0]
    assert np.array_equal(f.counts_on + f.counts_off, f.counts)


def test_bad_parameters():
    with pytest.raises(ValueError):
        periodic_frames(empty_stream(), 0, 10, G)
    with pytest.raises(ValueError):
        periodic_frames(empty_stream(), 10, 0, G)


def test_hot_pixel_examples():
    s = make_stream(np.arange(10), 2, 3, 1)
    s = np.concatenate([s, make_stream([0], 0, 0, 1)])
    assert hot_pixel(s) == (2, 3)
    tie = make_stream([0, 1, 2, 3, 4, 5], [3, 2, 3, 2, 3, 2], [5, 7, 5, 7, 5, 7], 1)
    assert hot_pixel(tie) == (3, 5)
    with pytest.raises(NoSignalError):
        hot_pixel(s, roi=BoundingBox(4, 0, 2, 2))
    with pytest.raises(NoSignalError):
        hot_pixel(empty_stream())


def test_hot_pixel_tie_prefers_row_over_column():
    s = make_stream([0, 1], [0, 5], [2, 1], 1)
    assert hot_pixel(s) == (5, 1)


def test_hot_pixel_exhaustive_small_geometry():
    # every count assignment on a 2x2 sensor with up to 2 events per pixel
    pix = [(0, 0), (1, 0), (0, 1), (1, 1)]
    for counts in itertools.product(range(3), repeat=4):
        if not any(counts):
            continue
        xs = [p[0] for p, c in zip(pix, counts) for _ in range(c)]
        ys = [p[1] for p, c in zip(pix, counts) for _ in range(c)]
        x, y = hot_pixel(make_stream(np.arange(len(xs)), xs, ys, 1))
        best = max(counts)
        assert counts[pix.index((x, y))] == best
        first = min((p[1], p[0]) for p, c in zip(pix, counts) if c == best)
        assert (y, x) == first


def test_pgm_round_trip(tmp_path):
    counts = np.arange(24).reshape(4, 6)
    f = EventFrame(6, 4, counts, 200_000.0, 100_000.0)
    write_pgm(f, tmp_path / "f.pgm")
    g = read_pgm(tmp_path / "f.pgm")
    assert np.array_equal(g.counts, counts)
    assert (g.width, g.height, g.t_frame_us, g.accumulation_us) == (6, 4, 200_000.0, 100_000.0)
    assert (tmp_path / "f.pgm").read_text().startswith("P2\n")


def test_pgm_rejects_other_formats(tmp_path):
    p = tmp_path / "x.pgm"
    p.write_text("P5\n1 1\n255\n0\n")
    with pytest.raises(ValueError):
        read_pgm(p)

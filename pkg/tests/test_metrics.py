import json

import numpy as np
import pytest

from eventvlc.metrics import LinkReport, evaluate_link, hamming, reports_to_csv


def test_hamming_examples():
    rng = np.random.default_rng(0)
    a = rng.integers(0, 2, 64)
    assert hamming(a, a) == 0
    b = a.copy()
    b[7] ^= 1
    assert hamming(a, b) == 1
    assert hamming(a, 1 - a) == 64
    with pytest.raises(ValueError):
        hamming([0, 1], [0])


def test_link_examples():
    rng = np.random.default_rng(1)
    sent = [rng.integers(0, 2, 64) for _ in range(100)]
    r = evaluate_link(sent, sent, 1e6)
    assert (r.packet_error_rate, r.bit_error_rate) == (0.0, 0.0)
    r = evaluate_link(sent, sent[:98], 1e6)
    assert r.packet_error_rate == pytest.approx(0.02)
    assert r.bit_error_rate == 0 and r.avg_hamming == 0 and r.lost_count == 2
    one = [sent[0]]
    flipped = sent[0].copy()
    flipped[0] ^= 1
    r = evaluate_link(one, [flipped], 1e6)
    assert r.packet_error_rate == 1.0
    assert r.bit_error_rate == pytest.approx(1 / 64)


def test_length_mismatch_uses_common_prefix():
    r = evaluate_link([[1, 0, 1, 1]], [[1, 0]], 1000)
    assert r.packet_error_rate == 1.0 and r.length_mismatches == 1
    assert r.max_hamming == 0 and r.bit_error_rate == 0


def test_rate_and_empty():
    r = evaluate_link([[0] * 64, [1] * 64], [], 64_000)
    assert r.achieved_rate_bps == pytest.approx(2000.0)
    assert r.lost_count == 2 and r.no_signal
    with pytest.raises(ValueError):
        evaluate_link([], [], 1.0)


def test_report_invariants_randomized():
    rng = np.random.default_rng(2)
    for _ in range(300):
        n = int(rng.integers(1, 10))
        length = int(rng.choice([8, 64]))
        sent = [rng.integers(0, 2, length) for _ in range(n)]
        got = []
        for s in sent[: int(rng.integers(0, n + 1))]:
            g = s.copy()
            flips = rng.random(length) < rng.uniform(0, 0.2)
            g[flips] ^= 1
            if rng.random() < 0.1:
                g = g[: length // 2]
            got.append(g)
        r = evaluate_link(sent, got, 1e5)
        assert 0 <= r.packet_error_rate <= 1 and 0 <= r.bit_error_rate <= 1
        assert r.max_hamming >= r.avg_hamming >= 0 and r.total_packets == n
        if r.packet_error_rate == 0:
            assert r.bit_error_rate == 0 and r.max_hamming == 0
        assert r.bit_error_rate <= r.max_hamming / (length // 2 if r.length_mismatches else length) + 1e-12


def test_order_matters():
    a, b = [0, 0, 1, 1], [1, 1, 0, 0]
    assert evaluate_link([a, b], [a, b], 1).packet_error_rate == 0
    assert evaluate_link([a, b], [b, a], 1).packet_error_rate == 1


def test_serialisation():
    r = evaluate_link([[0, 1]], [[1, 1]], 1000)
    d = json.loads(r.to_json())
    assert set(d) >= {"packet_error_rate", "total_packets", "avg_hamming", "max_hamming", "bit_error_rate", "achieved_rate_bps"}
    assert LinkReport.from_dict(d) == r
    text = reports_to_csv([r.to_dict()])
    assert text.splitlines()[0].startswith("packet_error_rate,total_packets")

import itertools

import numpy as np
import pytest

from eventvlc.codec import (
    AdaptiveMode,
    PulseString,
    SchemeConfig,
    airtime,
    all_combos_packet,
    as_bits,
    bits_to_str,
    encode_npulse2,
    encode_npulse4,
    encode_npulse4_adaptive,
    encode_ook,
    encode_packet,
    encode_stream,
    ook_frame,
    parse_pulse_runs,
    payload_airtime,
    read_pulse_file,
    theoretical_rate,
    write_pulse_file,
)
from eventvlc.exceptions import ConfigError, InvalidPacketError

G = "000000"
SYNC5 = "10" * 5
SYNC8 = "10" * 8
SYNC11 = "10" * 11


def test_ook_examples():
    assert encode_ook("1010").slots == "1010"
    assert encode_ook([0, 0, 0, 0]).slots == "0000"
    assert ook_frame("0101").slots == "10101010"


def test_ook_length_equals_bits():
    rng = np.random.default_rng(0)
    for n in range(0, 40):
        assert len(encode_ook(rng.integers(0, 2, n))) == n


def test_npulse2_examples():
    assert encode_npulse2([0]).slots == SYNC5 + G + "10" + G
    assert encode_npulse2([1]).slots == SYNC5 + G + "1010" + G
    assert encode_npulse2([]).slots == SYNC5 + G


def test_npulse4_examples():
    assert encode_npulse4("00").slots == SYNC8 + G + "10" + G
    assert encode_npulse4("11").slots == SYNC8 + G + "10101010" + G
    assert encode_npulse4("0110").slots == SYNC8 + G + "1010" + G + "101010" + G
    with pytest.raises(InvalidPacketError):
        encode_npulse4("011")


def test_adaptive_examples():
    p, mode = encode_npulse4_adaptive("1111")
    assert mode is AdaptiveMode.swapped_11
    assert p.slots == SYNC11 + G + "10" + G + "10" + G
    p, mode = encode_npulse4_adaptive("0000")
    assert mode is AdaptiveMode.default_00
    assert p.slots == SYNC8 + G + "10" + G + "10" + G
    _, mode = encode_npulse4_adaptive("0011")
    assert mode is AdaptiveMode.default_00
    with pytest.raises(InvalidPacketError):
        encode_npulse4_adaptive("1")


def test_adaptive_swapped_table_keeps_middle_symbols():
    p, _ = encode_npulse4_adaptive("011011")
    assert parse_pulse_runs(p) == [11, 2, 3, 1]


def test_airtime_examples():
    assert airtime(PulseString("10")) == 200
    assert airtime(PulseString("")) == 0
    assert airtime(encode_npulse4("00")) == 3000


def test_rates():
    assert theoretical_rate("npulse2") == pytest.approx(952.38, abs=0.5)
    assert theoretical_rate("npulse4") == pytest.approx(2352.94, abs=0.5)
    assert theoretical_rate("ook_raw") == 10_000
    assert theoretical_rate("adaptive_best") == 1828.57
    assert theoretical_rate("adaptive_avg") == 1702.13
    assert theoretical_rate("adaptive_worst") == 1454.54
    with pytest.raises(ValueError):
        theoretical_rate("qam")


def all_packets(max_len, even=False):
    for n in range(0 if not even else 2, max_len + 1, 2 if even else 1):
        for bits in itertools.product((0, 1), repeat=n):
            yield list(bits)


def test_well_formed_pulse_runs():
    rng = np.random.default_rng(1)
    packets = list(all_packets(8, even=True)) + [list(rng.integers(0, 2, 64)) for _ in range(200)]
    for bits in packets:
        for p, sync in ((encode_npulse4(bits), {8}), (encode_npulse4_adaptive(bits)[0], {8, 11}), (encode_npulse2(bits), {5})):
            runs = parse_pulse_runs(p)
            assert runs[0] in sync
            assert all(1 <= r <= 4 for r in runs[1:])
            n_sym = len(bits) if runs[0] == 5 else len(bits) // 2
            assert len(runs) == 1 + n_sym


def test_parse_rejects_malformed():
    for bad in ("110" + G, "10" + "000", "10" + G + "0" + "10" + G, "0" + "10" + G):
        with pytest.raises(ValueError):
            parse_pulse_runs(PulseString(bad))


def test_sync_distinguishability_validated():
    with pytest.raises(ConfigError):
        SchemeConfig(sync2_pulses=4)
    with pytest.raises(ConfigError):
        SchemeConfig(sync00_pulses=11, sync11_pulses=11)
    with pytest.raises(ConfigError):
        SchemeConfig(guard_us=650)
    assert SchemeConfig(guard_us=300).guard_slots == 3


def test_adaptive_never_costs_more():
    rng = np.random.default_rng(2)
    packets = list(all_packets(10, even=True)) + [list(rng.integers(0, 2, 64)) for _ in range(500)]
    for bits in packets:
        a = payload_airtime(encode_npulse4_adaptive(bits)[0])
        d = payload_airtime(encode_npulse4(bits))
        ones = sum(bits)
        assert a <= d
        assert (a < d) == (ones > len(bits) - ones)


def test_stream_and_packet_helpers():
    s = encode_stream(["00", "11"], "npulse4")
    assert s.slots == G + encode_npulse4("00").slots + encode_npulse4("11").slots + G
    assert encode_packet("0101", "ook").slots == "10101010"
    with pytest.raises(ValueError):
        encode_packet("01", "fsk")


def test_all_combos_packet():
    p = all_combos_packet()
    assert len(p) == 64
    assert [bits_to_str(p[i : i + 4]) for i in range(0, 64, 4)] == [format(i, "04b") for i in range(16)]


def test_bits_validation():
    with pytest.raises(InvalidPacketError):
        as_bits("0121")
    with pytest.raises(InvalidPacketError):
        as_bits([0, 2])
    with pytest.raises(ValueError):
        PulseString("10x")
    with pytest.raises(ValueError):
        PulseString("10", 100) + PulseString("10", 50)


def test_pulse_file_round_trip(tmp_path):
    p = encode_npulse4("0110", SchemeConfig(slot_us=50, guard_us=300))
    write_pulse_file(p, tmp_path / "p.txt")
    text = (tmp_path / "p.txt").read_text()
    assert text.startswith("# slot_us=50\n") and text.endswith("\n")
    assert read_pulse_file(tmp_path / "p.txt") == p

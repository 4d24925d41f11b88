"""Receive side: pixel events to slot bits to packets."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .codec import SchemeConfig, as_bits, bits_to_str
from .exceptions import InvalidStreamError, NoDetectionError, UndefinedCorrelationError

__all__ = [
    "DecodeLog",
    "SWAPPED_DECODE",
    "DEFAULT_DECODE",
    "BINARY_DECODE",
    "sliding_demodulator",
    "pulse_run_indices",
    "pulse_runs",
    "demodulate_bits_from_indices",
    "demodulate_npulse2",
    "decode_scheme",
    "decode_payload",
    "extract_payloads",
    "pearson",
    "pearson_matrix",
    "correlate_id",
    "packets_to_hex",
    "hex_to_packets",
]

SWAPPED_DECODE = {1: [1, 1], 2: [0, 1], 3: [1, 0], 4: [0, 0]}
DEFAULT_DECODE = {1: [0, 0], 2: [0, 1], 3: [1, 0], 4: [1, 1]}
BINARY_DECODE = {1: [0], 2: [1]}


@dataclass
class DecodeLog:
    """Trace of one decoding pass. Positions are indices into the
    pulse-run index list; ``bit_index`` is the slot position."""

    runs: List[Dict] = field(default_factory=list)
    syncs: List[Dict] = field(default_factory=list)
    anomalies: List[Dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _as_events(events) -> np.ndarray:
    arr = np.asarray(events, dtype=np.int64)
    if arr.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidStreamError("events must be (t, polarity) pairs")
    return arr


def sliding_demodulator(events, bit_time_us: float) -> np.ndarray:
    """Rebuild the slot-level bit sequence seen by one pixel.

    Each event starts a new slot at its polarity level; a gap of ``n``
    bit times (rounded half up, at least 1) first repeats the previous
    level ``n - 1`` times.
    """
    if not bit_time_us > 0:
        raise ValueError("bit_time_us must be > 0")
    ev = _as_events(events)
    if len(ev) == 0:
        return np.zeros(0, dtype=np.uint8)
    t, p = ev[:, 0], ev[:, 1].astype(np.uint8)
    dt = np.diff(t)
    if np.any(dt < 0):
        raise InvalidStreamError("events are not sorted by time")
    n = np.maximum(np.floor(dt / bit_time_us + 0.5).astype(np.int64), 1)
    # per gap: (n - 1) copies of the previous level, then the new level
    values = np.empty(2 * len(dt) + 1, dtype=np.uint8)
    counts = np.empty(2 * len(dt) + 1, dtype=np.int64)
    values[0], counts[0] = p[0], 1
    values[1::2], counts[1::2] = p[:-1], n - 1
    values[2::2], counts[2::2] = p[1:], 1
    return np.repeat(values, counts)


def pulse_run_indices(bits) -> np.ndarray:
    """Positions ``i`` where ``bits[i:i+2] == [1, 0]``."""
    b = np.asarray(bits)
    if len(b) < 2:
        return np.zeros(0, dtype=np.int64)
    return np.flatnonzero((b[:-1] == 1) & (b[1:] == 0))


def pulse_runs(indices, pattern_length: int = 2) -> List[tuple]:
    """Group indices into maximal arithmetic runs: ``[(start, count), ...]``."""
    idx = list(indices)
    out = []
    i = 0
    while i < len(idx):
        count = 1
        while i + count < len(idx) and idx[i + count] == idx[i] + count * pattern_length:
            count += 1
        out.append((i, count))
        i += count
    return out


def demodulate_bits_from_indices(
    indices,
    pattern_length: int = 2,
    sync_threshold_00: int = 8,
    sync_threshold_11: int = 11,
    log: Optional[DecodeLog] = None,
) -> List[List[int]]:
    """Run-length decoder for the 4-level code with adaptive mapping.

    Runs shorter than both sync lengths map through the active table;
    lengths the table does not cover add nothing and are recorded as
    anomalies in ``log``. Runs seen before any sync are skipped.
    """
    idx = [int(v) for v in indices]
    decoded: List[int] = []
    packets: List[List[int]] = []
    in_sync_00 = in_sync_11 = False
    for start, count in pulse_runs(idx, pattern_length):
        if log is not None:
            log.runs.append({"bit_index": idx[start], "count": count})
        if count >= sync_threshold_11 or count >= sync_threshold_00:
            if decoded:
                packets.append(decoded)
            decoded = []
            in_sync_11, in_sync_00 = count >= sync_threshold_11, count >= sync_threshold_00
            if log is not None:
                mode = "swapped_11" if in_sync_11 else "default_00"
                log.syncs.append({"bit_index": idx[start], "count": count, "mode": mode})
            continue
        if in_sync_11:
            table = SWAPPED_DECODE
        elif in_sync_00:
            table = DEFAULT_DECODE
        else:
            if log is not None:
                log.anomalies.append({"bit_index": idx[start], "count": count, "reason": "before sync"})
            continue
        if count not in table and log is not None:
            log.anomalies.append({"bit_index": idx[start], "count": count, "reason": "unmapped run"})
        decoded.extend(table.get(count, []))
    if decoded:
        packets.append(decoded)
    return packets


def demodulate_npulse2(
    indices, pattern_length: int = 2, sync_threshold: int = 5, log: Optional[DecodeLog] = None
) -> List[List[int]]:
    """Same run-length walk for the 2-symbol code: 1 pulse is 0, 2 pulses are 1."""
    idx = [int(v) for v in indices]
    decoded: List[int] = []
    packets: List[List[int]] = []
    synced = False
    for start, count in pulse_runs(idx, pattern_length):
        if log is not None:
            log.runs.append({"bit_index": idx[start], "count": count})
        if count >= sync_threshold:
            if decoded:
                packets.append(decoded)
            decoded = []
            synced = True
            if log is not None:
                log.syncs.append({"bit_index": idx[start], "count": count, "mode": "binary"})
            continue
        if not synced or count not in BINARY_DECODE:
            if log is not None:
                reason = "before sync" if not synced else "unmapped run"
                log.anomalies.append({"bit_index": idx[start], "count": count, "reason": reason})
            continue
        decoded.extend(BINARY_DECODE[count])
    if decoded:
        packets.append(decoded)
    return packets


def decode_scheme(
    slot_bits, scheme: str, cfg: SchemeConfig = SchemeConfig(), payload_length: int = 4, log: Optional[DecodeLog] = None
) -> List[List[int]]:
    """Decode slot bits with the receiver matching ``scheme``.

    For ``ook`` every start/payload/stop match is returned, overlapping
    ones included.
    """
    if scheme == "ook":
        return [list(p) for p in extract_payloads(slot_bits, cfg.ook_start, cfg.ook_stop, payload_length)]
    idx = pulse_run_indices(slot_bits)
    if scheme == "npulse2":
        return demodulate_npulse2(idx, 2, cfg.sync2_pulses, log)
    if scheme in ("npulse4", "adaptive"):
        return demodulate_bits_from_indices(idx, 2, cfg.sync00_pulses, cfg.sync11_pulses, log)
    raise ValueError(f"unknown scheme {scheme!r}")


def _bitstr(bits) -> str:
    if isinstance(bits, str):
        return bits
    return bits_to_str(bits)


def extract_payloads(bits, start_bits="101", stop_bits="0", payload_length: int = 4) -> List[np.ndarray]:
    """Every framed payload, scanning each offset in turn."""
    s = _bitstr(bits)
    start, stop = _bitstr(start_bits), _bitstr(stop_bits)
    ls, lp, le = len(start), payload_length, len(stop)
    out = []
    for i in range(len(s) - ls - lp - le + 1):
        if s[i : i + ls] == start and s[i + ls + lp : i + ls + lp + le] == stop:
            out.append(as_bits(s[i + ls : i + ls + lp]))
    return out


def decode_payload(bits, start_bits, stop_bits, payload_length: int, expected_combo) -> tuple:
    """``(total_packets, wrong_packets)`` over every framed match."""
    expected = _bitstr(expected_combo)
    total = wrong = 0
    for payload in extract_payloads(bits, start_bits, stop_bits, payload_length):
        total += 1
        if bits_to_str(payload) != expected:
            wrong += 1
    return total, wrong


def pearson(a, b) -> float:
    a = np.asarray(as_bits(a), dtype=np.float64)
    b = np.asarray(as_bits(b), dtype=np.float64)
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    if len(a) < 2:
        raise ValueError("need at least two samples")
    da, db = a - a.mean(), b - b.mean()
    sa, sb = np.sqrt(np.sum(da * da)), np.sqrt(np.sum(db * db))
    if sa == 0 or sb == 0:
        raise UndefinedCorrelationError("zero standard deviation; correlation is undefined")
    return float(np.clip(np.sum(da * db) / (sa * sb), -1.0, 1.0))


def pearson_matrix(length: int = 4) -> np.ndarray:
    """Pearson coefficient for every pair of ``length``-bit words (NaN when undefined)."""
    words = [format(i, f"0{length}b") for i in range(2**length)]
    m = np.full((len(words), len(words)), np.nan)
    for i, a in enumerate(words):
        for j, b in enumerate(words):
            try:
                m[i, j] = pearson(a, b)
            except UndefinedCorrelationError:
                pass
    return m


def _has_variance(bits) -> bool:
    b = as_bits(bits)
    return 0 < int(b.sum()) < len(b)


def correlate_id(window, id_set: Sequence, start_bits="101", stop_bits="0") -> str:
    """Pick the transmitted ID from a slot-bit window.

    Framed payloads that exactly equal a candidate are majority-voted
    (ties go to the earlier candidate). Otherwise the candidate with the
    highest mean correlation against the framed payloads wins, or against
    every 4-bit slice of the window when nothing is framed. Constant IDs
    can only win through exact matches.
    """
    ids = [_bitstr(i) for i in id_set]
    if not ids:
        raise ValueError("id_set is empty")
    w = _bitstr(window)
    length = len(ids[0])
    if len(w) < length:
        raise NoDetectionError("window shorter than one ID")
    payloads = [bits_to_str(p) for p in extract_payloads(w, start_bits, stop_bits, length)]
    votes = Counter(p for p in payloads if p in ids)
    if votes:
        best = max(votes.values())
        return next(i for i in ids if votes.get(i) == best)
    pool = payloads or [w[k : k + length] for k in range(len(w) - length + 1)]
    pool = [p for p in pool if _has_variance(p)]
    scores = {}
    for cand in ids:
        if _has_variance(cand) and pool:
            scores[cand] = float(np.mean([pearson(cand, p) for p in pool]))
    if not scores:
        raise NoDetectionError("no framed ID and no defined correlation")
    best = max(scores.values())
    return next(i for i in ids if scores.get(i) == best)


def packets_to_hex(packets) -> List[str]:
    """One hex string per packet, zero-padded on the left to whole nibbles.
    The bit count is kept as a ``len:`` prefix so short packets survive."""
    out = []
    for p in packets:
        s = bits_to_str(p)
        width = -(-len(s) // 4)
        out.append(f"{len(s)}:{int(s, 2):0{width}x}" if s else "0:")
    return out


def hex_to_packets(lines) -> List[List[int]]:
    """Inverse of :func:`packets_to_hex`."""
    out = []
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        n, _, h = line.partition(":")
        n = int(n)
        out.append([int(c) for c in format(int(h, 16), f"0{n}b")] if n else [])
    return out

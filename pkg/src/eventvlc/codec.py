"""Transmit-side line codes.

Every N-pulse code is built from two primitives: a pulse, which is one on
slot followed by one off slot (``"10"``), and a guard, which is
``guard_us / slot_us`` off slots. A burst of ``n`` pulses is ``"10" * n``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Tuple

import numpy as np

from .exceptions import ConfigError, InvalidPacketError

__all__ = [
    "PulseString",
    "SchemeConfig",
    "AdaptiveMode",
    "SCHEMES",
    "DEFAULT_PULSES",
    "SWAPPED_PULSES",
    "as_bits",
    "bits_to_str",
    "all_combos_packet",
    "encode_ook",
    "ook_frame",
    "encode_npulse2",
    "encode_npulse4",
    "encode_npulse4_adaptive",
    "encode_packet",
    "encode_stream",
    "airtime",
    "payload_airtime",
    "parse_pulse_runs",
    "theoretical_rate",
    "write_pulse_file",
    "read_pulse_file",
]

SCHEMES = ("ook", "npulse2", "npulse4", "adaptive")

# symbol (bit pair) -> pulse count
DEFAULT_PULSES = {(0, 0): 1, (0, 1): 2, (1, 0): 3, (1, 1): 4}
SWAPPED_PULSES = {(1, 1): 1, (0, 1): 2, (1, 0): 3, (0, 0): 4}


@dataclass(frozen=True)
class PulseString:
    """Slot-level transmit sequence; ``slots`` is a string over ``'1'``/``'0'``."""

    slots: str
    slot_us: float = 100.0

    def __post_init__(self):
        if not self.slot_us > 0:
            raise ValueError("slot_us must be > 0")
        if self.slots.strip("01"):
            raise ValueError("pulse string may only contain '0' and '1'")

    def __len__(self):
        return len(self.slots)

    def __str__(self):
        return self.slots

    def __add__(self, other: "PulseString") -> "PulseString":
        if other.slot_us != self.slot_us:
            raise ValueError("cannot join pulse strings with different slot durations")
        return PulseString(self.slots + other.slots, self.slot_us)

    def to_array(self) -> np.ndarray:
        return np.frombuffer(self.slots.encode("ascii"), dtype=np.uint8) - ord("0")


@dataclass(frozen=True)
class SchemeConfig:
    slot_us: float = 100.0
    guard_us: float = 600.0
    sync2_pulses: int = 5
    sync00_pulses: int = 8
    sync11_pulses: int = 11
    ook_start: str = "101"
    ook_stop: str = "0"

    def __post_init__(self):
        if not self.slot_us > 0:
            raise ConfigError("slot_us must be > 0")
        ratio = self.guard_us / self.slot_us
        if self.guard_us <= 0 or abs(ratio - round(ratio)) > 1e-9:
            raise ConfigError(f"guard_us ({self.guard_us}) must be a positive multiple of slot_us ({self.slot_us})")
        if self.sync00_pulses == self.sync11_pulses:
            raise ConfigError("sync00_pulses and sync11_pulses must differ")
        if min(self.sync2_pulses, self.sync00_pulses, self.sync11_pulses) < 5:
            raise ConfigError("sync bursts must be at least 5 pulses, longer than any data symbol")

    @property
    def guard_slots(self) -> int:
        return int(round(self.guard_us / self.slot_us))

    @property
    def guard(self) -> str:
        return "0" * self.guard_slots


class AdaptiveMode(enum.Enum):
    default_00 = "default_00"
    swapped_11 = "swapped_11"


def as_bits(bits) -> np.ndarray:
    """Accept a '0101' string or any 0/1 sequence; return a uint8 array."""
    if isinstance(bits, str):
        if bits.strip("01"):
            raise InvalidPacketError(f"not a bit string: {bits!r}")
        return np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
    arr = np.asarray(bits)
    if arr.size == 0:
        return np.zeros(0, dtype=np.uint8)
    if arr.ndim != 1 or np.any((arr != 0) & (arr != 1)):
        raise InvalidPacketError("bits must be a 1-d sequence of 0/1")
    return arr.astype(np.uint8)


def bits_to_str(bits) -> str:
    return "".join("1" if b else "0" for b in as_bits(bits))


def all_combos_packet() -> np.ndarray:
    """The 64-bit packet made of every 4-bit word 0000..1111 in order."""
    return as_bits("".join(format(i, "04b") for i in range(16)))


def _burst(n: int) -> str:
    return "10" * n


def _pairs(bits: np.ndarray):
    if len(bits) % 2:
        raise InvalidPacketError(f"4-level codes need an even bit count, got {len(bits)}")
    return [(int(bits[i]), int(bits[i + 1])) for i in range(0, len(bits), 2)]


def encode_ook(bits, cfg: SchemeConfig = SchemeConfig()) -> PulseString:
    """One slot per bit: on for 1, off for 0."""
    return PulseString(bits_to_str(bits), cfg.slot_us)


def ook_frame(payload, cfg: SchemeConfig = SchemeConfig()) -> PulseString:
    """Start bits + payload + stop bits, OOK-keyed (the ID frame)."""
    return PulseString(cfg.ook_start + bits_to_str(payload) + cfg.ook_stop, cfg.slot_us)


def encode_npulse2(bits, cfg: SchemeConfig = SchemeConfig()) -> PulseString:
    guard = cfg.guard
    parts = [_burst(cfg.sync2_pulses), guard]
    for b in as_bits(bits):
        parts.append(_burst(2 if b else 1))
        parts.append(guard)
    return PulseString("".join(parts), cfg.slot_us)


def _encode_pairs(bits, table, sync_pulses, cfg):
    bits = as_bits(bits)
    guard = cfg.guard
    parts = [_burst(sync_pulses), guard]
    for pair in _pairs(bits):
        parts.append(_burst(table[pair]))
        parts.append(guard)
    return PulseString("".join(parts), cfg.slot_us)


def encode_npulse4(bits, cfg: SchemeConfig = SchemeConfig()) -> PulseString:
    return _encode_pairs(bits, DEFAULT_PULSES, cfg.sync00_pulses, cfg)


def encode_npulse4_adaptive(bits, cfg: SchemeConfig = SchemeConfig()) -> Tuple[PulseString, AdaptiveMode]:
    """Swap the pulse mapping when ones outnumber zeros; the sync length
    tells the receiver which table is active. Ties keep the default table."""
    bits = as_bits(bits)
    _pairs(bits)
    ones = int(bits.sum())
    zeros = len(bits) - ones
    if ones > zeros:
        return _encode_pairs(bits, SWAPPED_PULSES, cfg.sync11_pulses, cfg), AdaptiveMode.swapped_11
    return _encode_pairs(bits, DEFAULT_PULSES, cfg.sync00_pulses, cfg), AdaptiveMode.default_00


def encode_packet(bits, scheme: str, cfg: SchemeConfig = SchemeConfig()) -> PulseString:
    if scheme == "ook":
        return ook_frame(bits, cfg)
    if scheme == "npulse2":
        return encode_npulse2(bits, cfg)
    if scheme == "npulse4":
        return encode_npulse4(bits, cfg)
    if scheme == "adaptive":
        return encode_npulse4_adaptive(bits, cfg)[0]
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def encode_stream(packets: Iterable, scheme: str, cfg: SchemeConfig = SchemeConfig(), lead_in_slots=None) -> PulseString:
    """Concatenate encoded packets, framed by idle (off) slots on both ends
    so the first burst starts with a rising edge."""
    lead = cfg.guard_slots if lead_in_slots is None else lead_in_slots
    body = "".join(encode_packet(p, scheme, cfg).slots for p in packets)
    return PulseString("0" * lead + body + "0" * lead, cfg.slot_us)


def airtime(p: PulseString) -> float:
    """Duration in microseconds."""
    return len(p) * p.slot_us


def parse_pulse_runs(p: PulseString, cfg: SchemeConfig = SchemeConfig()) -> list:
    """Split a well-formed N-pulse string into its burst lengths.

    Raises ``ValueError`` unless the string is exactly
    ``burst guard burst guard ...`` with guards of ``cfg.guard_slots``.
    """
    s = p.slots
    runs = []
    i = 0
    g = cfg.guard_slots
    while i < len(s):
        n = 0
        while s.startswith("10", i):
            n += 1
            i += 2
        if n == 0:
            raise ValueError(f"expected a pulse at slot {i}")
        if s[i:i + g] != "0" * g or (i + g < len(s) and s[i + g] != "1"):
            raise ValueError(f"expected a guard of {g} slots at slot {i}")
        runs.append(n)
        i += g
    return runs


def payload_airtime(p: PulseString, cfg: SchemeConfig = SchemeConfig()) -> float:
    """Airtime after the leading sync burst and its guard."""
    runs = parse_pulse_runs(p, cfg)
    if not runs:
        return 0.0
    sync_slots = 2 * runs[0] + cfg.guard_slots
    return (len(p) - sync_slots) * p.slot_us


_ADAPTIVE_RATES = {"adaptive_best": 1828.57, "adaptive_avg": 1702.13, "adaptive_worst": 1454.54}


def theoretical_rate(scheme: str, cfg: SchemeConfig = SchemeConfig()) -> float:
    """Nominal payload bit rate in bps.

    The N-pulse figures price a pulse at one slot plus one guard and assume
    equiprobable symbols, ignoring sync overhead. The adaptive cases are
    the measured packet-level rates (sync included) and do not depend on
    ``cfg``.
    """
    if scheme == "npulse2":
        # 1.5 pulses per bit on average
        return 1e6 / (1.5 * (cfg.slot_us + cfg.guard_us))
    if scheme == "npulse4":
        # 2.5 pulses per 2-bit symbol on average, then one guard
        return 2e6 / (2.5 * cfg.slot_us + cfg.guard_us)
    if scheme == "ook_raw":
        return 1e6 / cfg.slot_us
    if scheme in _ADAPTIVE_RATES:
        return _ADAPTIVE_RATES[scheme]
    raise ValueError(f"unknown scheme {scheme!r}")


def write_pulse_file(p: PulseString, path) -> None:
    Path(path).write_text(f"# slot_us={p.slot_us:g}\n{p.slots}\n")


def read_pulse_file(path) -> PulseString:
    slot_us = 100.0
    slots = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            if key.strip() == "slot_us":
                slot_us = float(value)
        elif line:
            slots.append(line)
    return PulseString("".join(slots), slot_us)

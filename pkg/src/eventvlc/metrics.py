"""Link-quality accounting."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, fields
from typing import List, Sequence

import numpy as np

from .codec import as_bits

__all__ = ["LinkReport", "hamming", "evaluate_link", "reports_to_csv"]


@dataclass(frozen=True)
class LinkReport:
    """Lost packets count toward PER only; BER covers matched packets.

    ``length_mismatches`` counts decoded packets whose length differs from
    the sent one; those are compared over the common prefix.
    """

    packet_error_rate: float
    total_packets: int
    avg_hamming: float
    max_hamming: int
    bit_error_rate: float
    achieved_rate_bps: float
    lost_count: int = 0
    length_mismatches: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "LinkReport":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})

    @property
    def no_signal(self) -> bool:
        return self.total_packets > 0 and self.lost_count == self.total_packets


def hamming(a, b) -> int:
    a, b = as_bits(a), as_bits(b)
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    return int(np.count_nonzero(a != b))


def evaluate_link(sent: Sequence, received: Sequence, elapsed_us: float) -> LinkReport:
    """Compare packets in order; sent packets past the end of ``received`` are lost."""
    if len(sent) == 0:
        raise ValueError("sent must be non-empty")
    sent = [as_bits(p) for p in sent]
    received = [as_bits(p) for p in received]
    wrong = 0
    mismatches = 0
    dists: List[int] = []
    bits = 0
    for s, r in zip(sent, received):
        n = min(len(s), len(r))
        d = hamming(s[:n], r[:n])
        if len(s) != len(r):
            mismatches += 1
        if d > 0 or len(s) != len(r):
            wrong += 1
        dists.append(d)
        bits += n
    lost = max(0, len(sent) - len(received))
    payload_bits = sum(len(s) for s in sent)
    return LinkReport(
        packet_error_rate=(wrong + lost) / len(sent),
        total_packets=len(sent),
        avg_hamming=float(np.mean(dists)) if dists else 0.0,
        max_hamming=int(max(dists)) if dists else 0,
        bit_error_rate=sum(dists) / bits if bits else 0.0,
        achieved_rate_bps=payload_bits / (elapsed_us * 1e-6) if elapsed_us > 0 else 0.0,
        lost_count=lost,
        length_mismatches=mismatches,
    )


def reports_to_csv(rows: Sequence[dict], fieldnames=None) -> str:
    """CSV text for a list of flat dicts (e.g. sweep rows)."""
    rows = list(rows)
    if fieldnames is None:
        fieldnames = []
        for r in rows:
            fieldnames.extend(k for k in r if k not in fieldnames)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()

"""scikit-learn style wrappers around the functional core.

All wrappers are stateless apart from their hyper-parameters: ``fit``
only validates them and returns ``self``, so they drop into pipelines and
``clone`` / ``get_params`` / ``set_params`` work as usual.
"""
from __future__ import annotations

from typing import List, Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_nonneg, check_packets, check_pixel_events, check_positive, check_signals
from .codec import SCHEMES, SchemeConfig, encode_packet
from .demod import decode_scheme, sliding_demodulator
from .detect import detect_roi, iou
from .metrics import evaluate_link
from .sensor import SensorBiases, simulate_pixel

__all__ = ["NPulseEncoder", "EventCameraSimulator", "RoIDetector", "PacketDemodulator"]


def _scheme_cfg(est) -> SchemeConfig:
    return SchemeConfig(
        slot_us=est.slot_us,
        guard_us=est.guard_us,
        sync2_pulses=est.sync2_pulses,
        sync00_pulses=est.sync00_pulses,
        sync11_pulses=est.sync11_pulses,
    )


def _check_scheme(scheme):
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")


class NPulseEncoder(TransformerMixin, BaseEstimator):
    """Packets to pulse strings. ``inverse_transform`` decodes the slots
    directly (a noiseless channel)."""

    def __init__(self, scheme="adaptive", slot_us=100.0, guard_us=600.0, sync2_pulses=5, sync00_pulses=8, sync11_pulses=11):
        self.scheme = scheme
        self.slot_us = slot_us
        self.guard_us = guard_us
        self.sync2_pulses = sync2_pulses
        self.sync00_pulses = sync00_pulses
        self.sync11_pulses = sync11_pulses

    def fit(self, X=None, y=None):
        _check_scheme(self.scheme)
        self.scheme_cfg_ = _scheme_cfg(self)
        return self

    def transform(self, X):
        if not hasattr(self, "scheme_cfg_"):
            self.fit()
        packets = check_packets(X, even=self.scheme in ("npulse4", "adaptive"))
        return [encode_packet(p, self.scheme, self.scheme_cfg_) for p in packets]

    def inverse_transform(self, X) -> List[List[int]]:
        if not hasattr(self, "scheme_cfg_"):
            self.fit()
        out = []
        for p in X:
            got = decode_scheme(p.to_array(), self.scheme, self.scheme_cfg_)
            out.append(got[0] if got else [])
        return out


class EventCameraSimulator(TransformerMixin, BaseEstimator):
    """Intensity signals to per-pixel ``(t, polarity)`` event arrays."""

    def __init__(
        self,
        diff_on=0.2,
        diff_off=0.2,
        f0_cutoff_hz=10_000.0,
        hpf_cutoff_hz=10.0,
        refractory_us=10.0,
        background_rate_hz=0.1,
        slot_us=100.0,
        dt_us=1.0,
        seed=0,
    ):
        self.diff_on = diff_on
        self.diff_off = diff_off
        self.f0_cutoff_hz = f0_cutoff_hz
        self.hpf_cutoff_hz = hpf_cutoff_hz
        self.refractory_us = refractory_us
        self.background_rate_hz = background_rate_hz
        self.slot_us = slot_us
        self.dt_us = dt_us
        self.seed = seed

    def fit(self, X=None, y=None):
        check_positive("slot_us", self.slot_us)
        check_positive("dt_us", self.dt_us)
        check_nonneg("refractory_us", self.refractory_us)
        self.biases_ = SensorBiases(
            self.diff_on, self.diff_off, self.f0_cutoff_hz, self.hpf_cutoff_hz, self.refractory_us, self.background_rate_hz
        )
        return self

    def transform(self, X) -> List[np.ndarray]:
        if not hasattr(self, "biases_"):
            self.fit()
        signals = check_signals(X, self.slot_us)
        return [simulate_pixel(s, self.biases_, seed=self.seed + i, dt_us=self.dt_us) for i, s in enumerate(signals)]


class RoIDetector(BaseEstimator):
    """Largest-component bounding box per frame; ``score`` is the mean IoU
    (a missed detection scores 0)."""

    def __init__(self, threshold=50.0, cap=5):
        self.threshold = threshold
        self.cap = cap

    def fit(self, X=None, y=None):
        check_nonneg("threshold", self.threshold)
        check_positive("cap", self.cap)
        return self

    def predict(self, X):
        self.fit()
        return [detect_roi(f, self.threshold, int(self.cap)) for f in X]

    def score(self, X, y) -> float:
        pred = self.predict(X)
        vals = [iou(p, t) if p is not None and t is not None else 0.0 for p, t in zip(pred, y)]
        return float(np.mean(vals)) if vals else 0.0


class PacketDemodulator(BaseEstimator):
    """Hot-pixel events to decoded packets. ``predict`` returns one list of
    packets per recording; ``score`` is ``1 - PER`` averaged over recordings."""

    def __init__(self, scheme="adaptive", slot_us=100.0, guard_us=600.0, sync2_pulses=5, sync00_pulses=8, sync11_pulses=11, payload_length=4):
        self.scheme = scheme
        self.slot_us = slot_us
        self.guard_us = guard_us
        self.sync2_pulses = sync2_pulses
        self.sync00_pulses = sync00_pulses
        self.sync11_pulses = sync11_pulses
        self.payload_length = payload_length

    def fit(self, X=None, y=None):
        _check_scheme(self.scheme)
        self.scheme_cfg_ = _scheme_cfg(self)
        return self

    def predict(self, X):
        self.fit()
        out = []
        for ev in X:
            bits = sliding_demodulator(check_pixel_events(ev), self.scheme_cfg_.slot_us)
            out.append(decode_scheme(bits, self.scheme, self.scheme_cfg_, self.payload_length))
        return out

    def score(self, X, y) -> float:
        decoded = self.predict(X)
        vals = [1.0 - evaluate_link(sent, got, 1.0).packet_error_rate for sent, got in zip(y, decoded)]
        return float(np.mean(vals)) if vals else 0.0

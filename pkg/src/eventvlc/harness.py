"""End-to-end experiment runner and parameter sweeps.

One run: packets -> pulse string -> scene -> events -> frames -> RoI ->
hot pixel -> slot bits -> packets -> :class:`LinkReport`.
"""
from __future__ import annotations

import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .channel import AmbientLight, SceneSpec, TransmitterWaveform, compose_scene, disc_mask, mask_bbox
from .codec import PulseString, airtime, all_combos_packet, bits_to_str, encode_packet, encode_stream
from .config import ExperimentConfig, surface_preset
from .demod import DecodeLog, decode_scheme, packets_to_hex, sliding_demodulator
from .detect import detect_roi, write_annotations
from .exceptions import ConfigError, NoSignalError
from .framing import hot_pixel, periodic_frames, write_pgm
from .geometry import BoundingBox
from .metrics import LinkReport, evaluate_link, reports_to_csv
from .sensor import SensorBiases, average_event_rate, filter_roi, pixel_events, simulate_sensor, write_events_csv

__all__ = [
    "RunResult",
    "ExperimentResult",
    "make_packets",
    "build_transmission",
    "build_scene",
    "run_once",
    "run_experiment",
    "aggregate",
    "event_rate_sweep",
    "sweep",
    "SWEEP_PARAMETERS",
]

log = logging.getLogger(__name__)

SWEEP_PARAMETERS = ("transmitter_hz", "ambient_sigma", "surface_preset", "scheme")
METRICS = ("packet_error_rate", "bit_error_rate", "avg_hamming", "max_hamming", "lost_count", "achieved_rate_bps")


@dataclass
class RunResult:
    seed: int
    report: LinkReport
    sent: List[np.ndarray]
    decoded: List[List[int]]
    roi: Optional[BoundingBox]
    truth_box: Optional[BoundingBox]
    hot_pixel: Optional[tuple]
    roi_fallback: bool
    no_signal: bool
    n_events: int
    pixel_events: np.ndarray
    decode_log: DecodeLog
    payload_airtime_us: float

    def summary(self) -> dict:
        return {
            "seed": self.seed,
            **self.report.to_dict(),
            "roi": list(self.roi.as_tuple()) if self.roi else None,
            "truth_box": list(self.truth_box.as_tuple()) if self.truth_box else None,
            "hot_pixel": list(self.hot_pixel) if self.hot_pixel else None,
            "roi_fallback": self.roi_fallback,
            "no_signal": self.no_signal,
            "n_events": self.n_events,
            "decoded_packets": len(self.decoded),
            "payload_airtime_us": self.payload_airtime_us,
        }


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    runs: List[RunResult]
    summary: Dict[str, Dict[str, float]]

    @property
    def reports(self) -> List[LinkReport]:
        return [r.report for r in self.runs]

    def mean(self, metric: str) -> float:
        return self.summary[metric]["mean"]


def _packet_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), 2]))


def _next_packet(cfg: ExperimentConfig, rng) -> np.ndarray:
    if cfg.packet_source == "combos":
        base = all_combos_packet()
        return np.resize(base, cfg.packet_length).astype(np.uint8)
    if cfg.packet_source == "fixed":
        return np.frombuffer(cfg.fixed_bits.encode(), dtype=np.uint8) - ord("0")
    return rng.integers(0, 2, cfg.packet_length).astype(np.uint8)


def make_packets(cfg: ExperimentConfig, seed: int) -> List[np.ndarray]:
    """``n_packets`` packets, or as many whole packets as fit in ``duration_us``."""
    rng = _packet_rng(seed)
    if cfg.n_packets is not None:
        return [_next_packet(cfg, rng) for _ in range(cfg.n_packets)]
    budget = cfg.duration_us - 2 * cfg.scheme_cfg.guard_us
    out, used = [], 0.0
    while True:
        p = _next_packet(cfg, rng)
        t = airtime(encode_packet(p, cfg.scheme, cfg.scheme_cfg))
        if used + t > budget:
            break
        out.append(p)
        used += t
    if not out:
        raise ConfigError("duration_us is too short for a single packet")
    return out


def build_transmission(cfg: ExperimentConfig, packets) -> PulseString:
    """Encoded packets framed by idle slots and padded (or cut) to ``duration_us``."""
    p = encode_stream(packets, cfg.scheme, cfg.scheme_cfg)
    if cfg.duration_us is None:
        return p
    n = int(math.ceil(cfg.duration_us / p.slot_us - 1e-9))
    slots = p.slots[:n] + "0" * max(0, n - len(p))
    return PulseString(slots, p.slot_us)


def build_scene(cfg: ExperimentConfig, pulses: PulseString, ambient: Optional[AmbientLight] = None) -> SceneSpec:
    o = cfg.obj
    mask = disc_mask(cfg.geometry, o.cx, o.cy, o.radius) if o.radius > 0 else np.zeros(
        (cfg.geometry.height, cfg.geometry.width), dtype=bool
    )
    tx = cfg.transmitter
    wave = TransmitterWaveform(pulses, pulses.slot_us, tx.on_level, tx.off_level, tx.noise_rel)
    return SceneSpec(cfg.geometry, mask, cfg.surface, cfg.ambient if ambient is None else ambient, wave)


def _densest_frame(frames):
    return max(frames, key=lambda f: f.total) if frames else None


def run_once(cfg: ExperimentConfig, seed: int, out_dir=None) -> RunResult:
    packets = make_packets(cfg, seed)
    pulses = build_transmission(cfg, packets)
    scene = build_scene(cfg, pulses)
    field_ = compose_scene(scene, None, seed)
    duration = airtime(pulses)
    stream = simulate_sensor(field_, cfg.biases, cfg.geometry, None, seed, cfg.dt_us)

    frames = periodic_frames(stream, cfg.accumulation_us, cfg.fps, cfg.geometry, duration)
    densest = _densest_frame(frames)
    roi = detect_roi(densest, cfg.detect_threshold, cfg.detect_cap) if densest is not None else None
    fallback = roi is None
    if fallback:
        log.warning("seed %d: no RoI found, using the full frame", seed)
    elif cfg.hardware_roi:
        stream = simulate_sensor(field_, cfg.biases, cfg.geometry, roi, seed, cfg.dt_us)
    roi_stream = filter_roi(stream, roi)

    dlog = DecodeLog()
    hot = None
    ev = np.zeros((0, 2), dtype=np.int64)
    try:
        hot = hot_pixel(roi_stream)
    except NoSignalError:
        log.warning("seed %d: no events in the region of interest", seed)
    if hot is not None:
        ev = pixel_events(roi_stream, *hot)
    bits = sliding_demodulator(ev, cfg.scheme_cfg.slot_us)
    decoded = decode_scheme(bits, cfg.scheme, cfg.scheme_cfg, cfg.packet_length, dlog)

    payload_time = sum(airtime(encode_packet(p, cfg.scheme, cfg.scheme_cfg)) for p in packets)
    report = evaluate_link(packets, decoded, payload_time)
    result = RunResult(
        seed=seed,
        report=report,
        sent=packets,
        decoded=decoded,
        roi=roi,
        truth_box=mask_bbox(scene.object_mask),
        hot_pixel=hot,
        roi_fallback=fallback,
        no_signal=len(decoded) == 0,
        n_events=len(stream),
        pixel_events=ev,
        decode_log=dlog,
        payload_airtime_us=payload_time,
    )
    if out_dir is not None:
        _write_run(Path(out_dir), result, stream, frames)
    return result


def _atomic_text(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    tmp.replace(path)


def _write_run(d: Path, r: RunResult, stream, frames) -> None:
    d.mkdir(parents=True, exist_ok=True)
    write_events_csv(stream, d / "events.csv")
    fdir = d / "frames"
    fdir.mkdir(exist_ok=True)
    for k, f in enumerate(frames):
        write_pgm(f, fdir / f"frame_{k:04d}.pgm")
    write_annotations({"detected": r.roi, "truth": r.truth_box}, d / "roi.csv")
    _atomic_text(d / "sent.hex", "\n".join(packets_to_hex(r.sent)) + "\n")
    _atomic_text(d / "decoded.hex", "".join(h + "\n" for h in packets_to_hex(r.decoded)))
    _atomic_text(d / "decode_log.json", r.decode_log.to_json(indent=1) + "\n")
    _atomic_text(d / "report.json", json.dumps(r.summary(), indent=2, sort_keys=True) + "\n")


def aggregate(reports: Sequence[LinkReport]) -> Dict[str, Dict[str, float]]:
    out = {}
    for m in METRICS:
        v = np.array([getattr(r, m) for r in reports], dtype=np.float64)
        out[m] = {"mean": float(v.mean()), "std": float(v.std()), "min": float(v.min()), "max": float(v.max())}
    return out


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> ExperimentResult:
    """Run every seed in ``cfg.seeds``; artifacts go to ``out_dir`` (or ``cfg.out_dir``)."""
    out_dir = out_dir if out_dir is not None else cfg.out_dir
    runs = []
    for seed in cfg.seeds:
        d = None if out_dir is None else Path(out_dir) / f"seed_{seed}"
        runs.append(run_once(cfg, seed, d))
    summary = aggregate([r.report for r in runs])
    if out_dir is not None:
        p = Path(out_dir)
        p.mkdir(parents=True, exist_ok=True)
        body = {"scheme": cfg.scheme, "surface": cfg.surface.label, "seeds": list(cfg.seeds), "summary": summary}
        _atomic_text(p / "summary.json", json.dumps(body, indent=2, sort_keys=True) + "\n")
    return ExperimentResult(cfg, runs, summary)


def event_rate_sweep(
    cfg: ExperimentConfig,
    freqs_hz: Sequence[float],
    roi_size: int = 10,
    measure_us: float = 500_000,
    seed: Optional[int] = None,
) -> List[dict]:
    """Average event rate of a ``roi_size`` square around the object centre
    while the transmitter toggles at each frequency.

    Every point simulates the same total span: a warm-up of ten high-pass
    time constants, then a fixed measurement window.
    """
    if len(freqs_hz) == 0:
        raise ConfigError("empty value list")
    seed = cfg.seeds[0] if seed is None else seed
    g = cfg.geometry
    side = min(roi_size, g.width, g.height)
    x0 = int(min(max(round(cfg.obj.cx - side / 2), 0), g.width - side))
    y0 = int(min(max(round(cfg.obj.cy - side / 2), 0), g.height - side))
    roi = BoundingBox(x0, y0, side, side)
    warm = 10 * 1e6 / (2 * math.pi * cfg.biases.hpf_cutoff_hz)
    total = warm + measure_us
    rows = []
    for f in freqs_hz:
        if not f > 0:
            raise ConfigError("frequencies must be > 0")
        half = 1e6 / (2 * f)
        pulses = PulseString("10", half)
        scene = build_scene(cfg, pulses)
        field_ = compose_scene(scene, total, seed)
        dt = min(cfg.dt_us, half / 10)
        stream = simulate_sensor(field_, cfg.biases, g, roi, seed, dt)
        t = stream["t"]
        inside = stream[(t >= warm) & (t < total)]
        rows.append(
            {
                "transmitter_hz": float(f),
                "event_rate_hz": average_event_rate(inside, measure_us),
                "events": int(len(inside)),
            }
        )
    return rows


def _sweep_row(name, value, res: ExperimentResult, extra=None) -> dict:
    row = {name: value}
    for m in METRICS:
        for k in ("mean", "std", "min", "max"):
            row[f"{m}_{k}"] = res.summary[m][k]
    row["payload_airtime_us_mean"] = float(np.mean([r.payload_airtime_us for r in res.runs]))
    if extra:
        row.update(extra)
    return row


def sweep(cfg: ExperimentConfig, parameter: str, values: Sequence, out_dir=None) -> List[dict]:
    """One row per value; ``transmitter_hz`` reports event rates, the rest
    aggregate link metrics over ``cfg.seeds``."""
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigError(f"unknown sweep parameter {parameter!r}; choose from {SWEEP_PARAMETERS}")
    values = list(values)
    if not values:
        raise ConfigError("empty value list")
    if parameter == "transmitter_hz":
        rows = event_rate_sweep(cfg, [float(v) for v in values])
    else:
        rows = []
        for v in values:
            if parameter == "ambient_sigma":
                c = cfg.replace(ambient=dataclasses.replace(cfg.ambient, shot_noise_sigma=float(v)))
            elif parameter == "surface_preset":
                c = cfg.replace(surface=surface_preset(str(v)))
            else:
                c = cfg.replace(scheme=str(v))
            sub = None if out_dir is None else Path(out_dir) / f"{parameter}_{v}"
            rows.append(_sweep_row(parameter, v, run_experiment(c, sub)))
    if out_dir is not None:
        p = Path(out_dir)
        p.mkdir(parents=True, exist_ok=True)
        _atomic_text(p / f"sweep_{parameter}.csv", reports_to_csv(rows))
    return rows

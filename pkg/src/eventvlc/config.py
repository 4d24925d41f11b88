"""Experiment configuration, named presets and the INI file format.

Example file::

    [experiment]
    scheme = adaptive
    packets = random
    n_packets = 20
    seeds = 0,1,2

    [scene]
    preset = ball
    taps = 200:0.3, 400:0.1

    [ambient]
    preset = ambient
    sigma = 0.03

Keys that are absent keep their defaults; an explicit key overrides the
preset named in the same section.
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

from .channel import AmbientLight, SurfaceProfile
from .codec import SCHEMES, SchemeConfig
from .exceptions import ConfigError
from .geometry import SensorGeometry
from .sensor import SensorBiases

__all__ = [
    "SURFACE_PRESETS",
    "AMBIENT_PRESETS",
    "TransmitterSettings",
    "ObjectSpec",
    "ExperimentConfig",
    "surface_preset",
    "ambient_preset",
    "load_config",
    "parse_config",
    "dump_config",
    "parse_taps",
]

# Calibration data, tuned so that the material ordering shows up in
# simulation; not measurements.
SURFACE_PRESETS = {
    "mirror": SurfaceProfile(0.95, 1.0, (), "mirror"),
    "ball": SurfaceProfile(0.85, 0.8, (), "ball"),
    # weak 500 us echo: lands in the guard just above threshold, so emitter
    # noise decides whether it produces a spurious pulse
    "flask": SurfaceProfile(0.6, 0.9, ((500.0, 0.0097),), "flask"),
    "nest": SurfaceProfile(0.5, 0.3, ((500.0, 0.0083),), "nest"),
    # strong late echoes: syncs survive, nearly every symbol gains pulses
    "tape": SurfaceProfile(0.3, 0.5, ((500.0, 0.05), (700.0, 0.05)), "tape"),
    "foam": SurfaceProfile(0.0, 0.0, (), "foam"),
}

AMBIENT_PRESETS = {
    "none": AmbientLight(0.0, 120.0, 0.0, 0.0),
    "dark": AmbientLight(0.02, 120.0, 0.0, 0.0),
    "ambient": AmbientLight(0.3, 120.0, 0.03, 0.02),
}


def surface_preset(name: str) -> SurfaceProfile:
    try:
        return SURFACE_PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown surface preset {name!r}; choose from {sorted(SURFACE_PRESETS)}") from None


def ambient_preset(name: str) -> AmbientLight:
    try:
        return AMBIENT_PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown ambient preset {name!r}; choose from {sorted(AMBIENT_PRESETS)}") from None


@dataclass(frozen=True)
class TransmitterSettings:
    on_level: float = 1.0
    off_level: float = 0.05
    noise_rel: float = 0.15


@dataclass(frozen=True)
class ObjectSpec:
    """Disc-shaped reflector; ``radius <= 0`` means no object."""

    cx: float = 16.0
    cy: float = 12.0
    radius: float = 5.0


PACKET_SOURCES = ("random", "combos", "fixed")


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: str = "adaptive"
    scheme_cfg: SchemeConfig = SchemeConfig()
    surface: SurfaceProfile = SURFACE_PRESETS["mirror"]
    ambient: AmbientLight = AMBIENT_PRESETS["dark"]
    transmitter: TransmitterSettings = TransmitterSettings()
    biases: SensorBiases = SensorBiases(refractory_us=50.0)
    geometry: SensorGeometry = SensorGeometry(32, 24)
    obj: ObjectSpec = ObjectSpec()
    duration_us: Optional[float] = 3_000_000
    packet_source: str = "random"
    n_packets: Optional[int] = None
    packet_length: int = 64
    fixed_bits: str = ""
    seeds: Tuple[int, ...] = (0,)
    out_dir: Optional[str] = None
    fps: float = 10.0
    accumulation_us: float = 100_000
    detect_threshold: float = 50.0
    detect_cap: int = 5
    hardware_roi: bool = False
    dt_us: float = 1.0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.packet_source not in PACKET_SOURCES:
            raise ConfigError(f"packet source must be one of {PACKET_SOURCES}")
        if self.packet_length <= 0:
            raise ConfigError("packet_length must be > 0")
        if self.scheme in ("npulse4", "adaptive") and self.packet_length % 2:
            raise ConfigError("4-level schemes need an even packet_length")
        if self.packet_source == "fixed":
            if not self.fixed_bits or self.fixed_bits.strip("01"):
                raise ConfigError("fixed packets need fixed_bits as a 0/1 string")
            if self.scheme in ("npulse4", "adaptive") and len(self.fixed_bits) % 2:
                raise ConfigError("4-level schemes need an even number of fixed_bits")
        if self.n_packets is not None and self.n_packets <= 0:
            raise ConfigError("n_packets must be > 0")
        if self.n_packets is None and self.duration_us is None:
            raise ConfigError("set n_packets, duration_us or both")
        if self.duration_us is not None and self.duration_us <= 0:
            raise ConfigError("duration_us must be > 0")
        if not self.seeds:
            raise ConfigError("need at least one seed")
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if self.fps <= 0 or self.accumulation_us <= 0:
            raise ConfigError("fps and accumulation_us must be > 0")
        if self.detect_cap <= 0 or self.detect_threshold < 0:
            raise ConfigError("detect cap must be > 0 and threshold >= 0")
        if self.dt_us <= 0:
            raise ConfigError("dt_us must be > 0")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def parse_taps(text: str) -> Tuple[Tuple[float, float], ...]:
    """``"200:0.3, 400:0.1"`` -> ``((200.0, 0.3), (400.0, 0.1))``."""
    taps = []
    for item in text.replace(";", ",").split(","):
        item = item.strip()
        if not item:
            continue
        d, sep, g = item.partition(":")
        if not sep:
            raise ConfigError(f"tap {item!r} is not delay_us:gain")
        taps.append((float(d), float(g)))
    return tuple(taps)


def _f(v) -> str:
    return repr(float(v))


def _format_taps(taps) -> str:
    return ", ".join(f"{_f(d)}:{_f(g)}" for d, g in taps)


def _section(cp, name):
    return cp[name] if cp.has_section(name) else {}


def _get(sec, key, conv, default):
    if key not in sec:
        return default
    raw = sec[key]
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from None


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _opt_float(s: str):
    return None if s.strip().lower() in ("", "none") else float(s)


def _opt_int(s: str):
    return None if s.strip().lower() in ("", "none") else int(s)


def _seeds(s: str):
    out = []
    for part in s.split(","):
        part = part.strip()
        if ".." in part:
            a, b = part.split("..")
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return tuple(out)


def parse_config(text: str, base: ExperimentConfig = ExperimentConfig()) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    known = {"experiment", "scheme", "scene", "ambient", "transmitter", "sensor", "detect", "object", "geometry"}
    unknown = set(cp.sections()) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    ex = _section(cp, "experiment")
    sc = _section(cp, "scheme")
    s = base.scheme_cfg
    scheme_cfg = SchemeConfig(
        slot_us=_get(sc, "slot_us", float, s.slot_us),
        guard_us=_get(sc, "guard_us", float, s.guard_us),
        sync2_pulses=_get(sc, "sync2_pulses", int, s.sync2_pulses),
        sync00_pulses=_get(sc, "sync00_pulses", int, s.sync00_pulses),
        sync11_pulses=_get(sc, "sync11_pulses", int, s.sync11_pulses),
        ook_start=sc.get("ook_start", s.ook_start),
        ook_stop=sc.get("ook_stop", s.ook_stop),
    )

    se = _section(cp, "scene")
    surf = surface_preset(se["preset"]) if "preset" in se else base.surface
    surf = SurfaceProfile(
        reflectivity=_get(se, "reflectivity", float, surf.reflectivity),
        gloss=_get(se, "gloss", float, surf.gloss),
        multipath_taps=_get(se, "taps", parse_taps, surf.multipath_taps),
        label=se.get("label", surf.label),
        matte_spread_us=_get(se, "matte_spread_us", float, surf.matte_spread_us),
    )

    am = _section(cp, "ambient")
    amb = ambient_preset(am["preset"]) if "preset" in am else base.ambient
    amb = AmbientLight(
        dc_level=_get(am, "dc", float, amb.dc_level),
        flicker_hz=_get(am, "flicker_hz", float, amb.flicker_hz),
        flicker_amplitude=_get(am, "flicker_amplitude", float, amb.flicker_amplitude),
        shot_noise_sigma=_get(am, "sigma", float, amb.shot_noise_sigma),
    )

    tx = _section(cp, "transmitter")
    t = base.transmitter
    if "slot_us" in tx:
        scheme_cfg = dataclasses.replace(scheme_cfg, slot_us=_get(tx, "slot_us", float, 0))
    transmitter = TransmitterSettings(
        on_level=_get(tx, "on", float, t.on_level),
        off_level=_get(tx, "off", float, t.off_level),
        noise_rel=_get(tx, "noise", float, t.noise_rel),
    )

    sn = _section(cp, "sensor")
    b = base.biases
    biases = SensorBiases(
        diff_on=_get(sn, "diff_on", float, b.diff_on),
        diff_off=_get(sn, "diff_off", float, b.diff_off),
        f0_cutoff_hz=_get(sn, "f0_cutoff_hz", float, b.f0_cutoff_hz),
        hpf_cutoff_hz=_get(sn, "hpf_cutoff_hz", float, b.hpf_cutoff_hz),
        refractory_us=_get(sn, "refractory_us", float, b.refractory_us),
        background_rate_hz=_get(sn, "background_rate_hz", float, b.background_rate_hz),
    )
    geometry = SensorGeometry(
        _get(sn, "width", int, base.geometry.width), _get(sn, "height", int, base.geometry.height)
    )

    ob = _section(cp, "object")
    obj = ObjectSpec(
        _get(ob, "cx", float, base.obj.cx), _get(ob, "cy", float, base.obj.cy), _get(ob, "radius", float, base.obj.radius)
    )

    de = _section(cp, "detect")
    try:
        return ExperimentConfig(
            scheme=ex.get("scheme", base.scheme),
            scheme_cfg=scheme_cfg,
            surface=surf,
            ambient=amb,
            transmitter=transmitter,
            biases=biases,
            geometry=geometry,
            obj=obj,
            duration_us=_get(ex, "duration_us", _opt_float, base.duration_us),
            packet_source=ex.get("packets", base.packet_source),
            n_packets=_get(ex, "n_packets", _opt_int, base.n_packets),
            packet_length=_get(ex, "packet_length", int, base.packet_length),
            fixed_bits=ex.get("fixed_bits", base.fixed_bits),
            seeds=_get(ex, "seeds", _seeds, base.seeds),
            out_dir=ex.get("out_dir", base.out_dir),
            fps=_get(de, "fps", float, base.fps),
            accumulation_us=_get(de, "accumulation_us", float, base.accumulation_us),
            detect_threshold=_get(de, "threshold", float, base.detect_threshold),
            detect_cap=_get(de, "cap", int, base.detect_cap),
            hardware_roi=_get(de, "hardware_roi", _bool, base.hardware_roi),
            dt_us=_get(sn, "dt_us", float, base.dt_us),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path, base: ExperimentConfig = ExperimentConfig()) -> ExperimentConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config(p.read_text(), base)


def dump_config(cfg: ExperimentConfig) -> str:
    """INI text that :func:`parse_config` reads back to ``cfg``."""
    s, sf, am, tx, b = cfg.scheme_cfg, cfg.surface, cfg.ambient, cfg.transmitter, cfg.biases
    none = lambda v: "none" if v is None else _f(v) if isinstance(v, float) else str(v)
    lines = [
        "[experiment]",
        f"scheme = {cfg.scheme}",
        f"packets = {cfg.packet_source}",
        f"n_packets = {none(cfg.n_packets)}",
        f"packet_length = {cfg.packet_length}",
        f"duration_us = {none(cfg.duration_us)}",
        f"seeds = {','.join(map(str, cfg.seeds))}",
    ]
    if cfg.fixed_bits:
        lines.append(f"fixed_bits = {cfg.fixed_bits}")
    if cfg.out_dir:
        lines.append(f"out_dir = {cfg.out_dir}")
    lines += [
        "",
        "[scheme]",
        f"slot_us = {_f(s.slot_us)}",
        f"guard_us = {_f(s.guard_us)}",
        f"sync2_pulses = {s.sync2_pulses}",
        f"sync00_pulses = {s.sync00_pulses}",
        f"sync11_pulses = {s.sync11_pulses}",
        f"ook_start = {s.ook_start}",
        f"ook_stop = {s.ook_stop}",
        "",
        "[scene]",
        f"label = {sf.label}",
        f"reflectivity = {_f(sf.reflectivity)}",
        f"gloss = {_f(sf.gloss)}",
        f"taps = {_format_taps(sf.multipath_taps)}",
        f"matte_spread_us = {_f(sf.matte_spread_us)}",
        "",
        "[ambient]",
        f"dc = {_f(am.dc_level)}",
        f"flicker_hz = {_f(am.flicker_hz)}",
        f"flicker_amplitude = {_f(am.flicker_amplitude)}",
        f"sigma = {_f(am.shot_noise_sigma)}",
        "",
        "[transmitter]",
        f"on = {_f(tx.on_level)}",
        f"off = {_f(tx.off_level)}",
        f"noise = {_f(tx.noise_rel)}",
        "",
        "[sensor]",
        f"diff_on = {_f(b.diff_on)}",
        f"diff_off = {_f(b.diff_off)}",
        f"f0_cutoff_hz = {_f(b.f0_cutoff_hz)}",
        f"hpf_cutoff_hz = {_f(b.hpf_cutoff_hz)}",
        f"refractory_us = {_f(b.refractory_us)}",
        f"background_rate_hz = {_f(b.background_rate_hz)}",
        f"width = {cfg.geometry.width}",
        f"height = {cfg.geometry.height}",
        f"dt_us = {_f(cfg.dt_us)}",
        "",
        "[object]",
        f"cx = {_f(cfg.obj.cx)}",
        f"cy = {_f(cfg.obj.cy)}",
        f"radius = {_f(cfg.obj.radius)}",
        "",
        "[detect]",
        f"fps = {_f(cfg.fps)}",
        f"accumulation_us = {_f(cfg.accumulation_us)}",
        f"threshold = {_f(cfg.detect_threshold)}",
        f"cap = {cfg.detect_cap}",
        f"hardware_roi = {'true' if cfg.hardware_roi else 'false'}",
    ]
    return "\n".join(lines) + "\n"

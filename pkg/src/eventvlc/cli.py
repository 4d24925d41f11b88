"""Command-line entry point: ``eventvlc <command> [options]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channel import TransmitterWaveform, waveform_to_signal
from .codec import SCHEMES, as_bits, encode_packet, read_pulse_file, write_pulse_file
from .config import ExperimentConfig, load_config
from .demod import DecodeLog, decode_scheme, hex_to_packets, packets_to_hex, sliding_demodulator
from .detect import detect_roi, write_annotations
from .exceptions import EventVLCError, NoSignalError
from .framing import hot_pixel, periodic_frames, read_pgm, write_pgm
from .harness import SWEEP_PARAMETERS, build_scene, build_transmission, make_packets, run_experiment, sweep
from .channel import compose_scene
from .metrics import evaluate_link, reports_to_csv
from .sensor import filter_roi, pixel_events, read_events_csv, simulate_sensor, write_events_csv

log = logging.getLogger("eventvlc")


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    changes = {}
    if getattr(args, "scheme", None):
        changes["scheme"] = args.scheme
    if getattr(args, "seed", None) is not None:
        changes["seeds"] = (args.seed,)
    return cfg.replace(**changes) if changes else cfg


def _emit(payload, args, csv_rows=None):
    """Print (or write to ``--out`` when it names a file) as JSON or CSV."""
    if args.format == "csv":
        rows = csv_rows if csv_rows is not None else [payload]
        text = reports_to_csv(rows)
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    out = getattr(args, "out", None)
    if out and Path(out).suffix in (".json", ".csv"):
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _out_dir(args, default=".") -> Path:
    d = Path(args.out or default)
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_encode(args):
    cfg = _config(args)
    if args.bits is not None:
        bits = args.bits
    elif args.bits_file:
        bits = Path(args.bits_file).read_text().split()[0]
    else:
        bits = "".join(format(i, "04b") for i in range(16))
    p = encode_packet(as_bits(bits), cfg.scheme, cfg.scheme_cfg)
    if args.out:
        write_pulse_file(p, args.out)
    else:
        sys.stdout.write(f"# slot_us={p.slot_us:g}\n{p.slots}\n")


def cmd_modulate(args):
    cfg = _config(args)
    p = read_pulse_file(args.pulses)
    tx = cfg.transmitter
    sig = waveform_to_signal(TransmitterWaveform(p, p.slot_us, tx.on_level, tx.off_level))
    t = np.arange(len(sig)) * sig.slot_us
    lines = ["t_us,level"] + [f"{a:g},{b:g}" for a, b in zip(t, sig.samples)]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_simulate(args):
    cfg = _config(args)
    seed = cfg.seeds[0]
    packets = make_packets(cfg, seed)
    pulses = build_transmission(cfg, packets)
    field = compose_scene(build_scene(cfg, pulses), None, seed)
    stream = simulate_sensor(field, cfg.biases, cfg.geometry, None, seed, cfg.dt_us)
    d = _out_dir(args)
    write_events_csv(stream, d / "events.csv")
    (d / "sent.hex").write_text("\n".join(packets_to_hex(packets)) + "\n")
    log.info("wrote %d events to %s", len(stream), d / "events.csv")


def cmd_frames(args):
    cfg = _config(args)
    stream = read_events_csv(args.events)
    frames = periodic_frames(stream, args.accumulation_us or cfg.accumulation_us, args.fps or cfg.fps, cfg.geometry)
    d = _out_dir(args, "frames")
    for k, f in enumerate(frames):
        write_pgm(f, d / f"frame_{k:04d}.pgm")
    log.info("wrote %d frames to %s", len(frames), d)


def _densest(cfg, path):
    if str(path).endswith(".pgm"):
        return read_pgm(path)
    frames = periodic_frames(read_events_csv(path), cfg.accumulation_us, cfg.fps, cfg.geometry)
    return max(frames, key=lambda f: f.total) if frames else None


def cmd_roi(args):
    cfg = _config(args)
    frame = _densest(cfg, args.input)
    box = detect_roi(frame, cfg.detect_threshold, cfg.detect_cap) if frame is not None else None
    if args.out and Path(args.out).suffix == ".csv" and args.format != "json":
        write_annotations({"detected": box}, args.out)
        return
    _emit({"label": "detected", **dict(zip("xywh", box.as_tuple() if box else (None,) * 4))}, args)


def cmd_decode(args):
    cfg = _config(args)
    stream = read_events_csv(args.events)
    roi = None
    if not args.no_roi:
        frames = periodic_frames(stream, cfg.accumulation_us, cfg.fps, cfg.geometry)
        if frames:
            roi = detect_roi(max(frames, key=lambda f: f.total), cfg.detect_threshold, cfg.detect_cap)
    sub = filter_roi(stream, roi)
    dlog = DecodeLog()
    try:
        x, y = (args.pixel if args.pixel else hot_pixel(sub))
        ev = pixel_events(sub if not args.pixel else stream, x, y)
    except NoSignalError:
        log.warning("no events to decode")
        x = y = None
        ev = np.zeros((0, 2), dtype=np.int64)
    bits = sliding_demodulator(ev, cfg.scheme_cfg.slot_us)
    packets = decode_scheme(bits, cfg.scheme, cfg.scheme_cfg, cfg.packet_length, dlog)
    d = _out_dir(args)
    (d / "decoded.hex").write_text("".join(h + "\n" for h in packets_to_hex(packets)))
    body = {"pixel": [x, y], "roi": list(roi.as_tuple()) if roi else None, **dlog.to_dict()}
    (d / "decode_log.json").write_text(json.dumps(body, indent=1) + "\n")
    log.info("decoded %d packets from pixel (%s, %s)", len(packets), x, y)


def cmd_evaluate(args):
    sent = hex_to_packets(Path(args.sent).read_text().splitlines())
    got = hex_to_packets(Path(args.decoded).read_text().splitlines())
    rep = evaluate_link(sent, got, args.elapsed_us)
    _emit(rep.to_dict(), args)


def cmd_run(args):
    cfg = _config(args)
    res = run_experiment(cfg, args.out)
    rows = [r.summary() for r in res.runs]
    if args.format == "csv":
        _emit(None, args, csv_rows=[{k: v for k, v in r.items() if not isinstance(v, list)} for r in rows])
    else:
        _emit({"runs": rows, "summary": res.summary}, args)


def _values(text: str):
    out = []
    for v in text.split(","):
        v = v.strip()
        if not v:
            continue
        try:
            out.append(float(v))
        except ValueError:
            out.append(v)
    return out


def cmd_sweep(args):
    cfg = _config(args)
    values = _values(args.values)
    if args.parameter == "transmitter_hz" and args.log_range:
        lo, hi, n = args.log_range
        values = list(np.geomspace(float(lo), float(hi), int(n)))
    rows = sweep(cfg, args.parameter, values, args.out if args.out and not Path(args.out).suffix else None)
    _emit(rows, args, csv_rows=rows)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config file (INI)")
    common.add_argument("--seed", type=int, help="override the config seeds with a single seed")
    common.add_argument("--scheme", choices=SCHEMES, help="override the config scheme")
    common.add_argument("--out", help="output directory or file")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="eventvlc", description="Event-camera optical link simulator")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", parents=[common], help="bits -> pulse-string file")
    p.add_argument("--bits", help="bit string (default: the 64-bit all-combinations packet)")
    p.add_argument("--bits-file")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("modulate", parents=[common], help="pulse string -> waveform preview CSV")
    p.add_argument("pulses")
    p.set_defaults(func=cmd_modulate)

    p = sub.add_parser("simulate", parents=[common], help="config -> event CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("frames", parents=[common], help="event CSV -> PGM frames")
    p.add_argument("events")
    p.add_argument("--fps", type=float)
    p.add_argument("--accumulation-us", type=float)
    p.set_defaults(func=cmd_frames)

    p = sub.add_parser("roi", parents=[common], help="densest frame -> bounding box")
    p.add_argument("input", help="event CSV or PGM frame")
    p.set_defaults(func=cmd_roi)

    p = sub.add_parser("decode", parents=[common], help="event CSV -> packets + decode log")
    p.add_argument("events")
    p.add_argument("--pixel", type=int, nargs=2, metavar=("X", "Y"), help="decode this pixel instead of the hot pixel")
    p.add_argument("--no-roi", action="store_true", help="skip RoI detection")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("evaluate", parents=[common], help="sent + decoded hex -> link report")
    p.add_argument("--sent", required=True)
    p.add_argument("--decoded", required=True)
    p.add_argument("--elapsed-us", type=float, required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("run", parents=[common], help="end-to-end experiment")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", parents=[common], help="parameter sweep -> table")
    p.add_argument("--parameter", required=True, choices=SWEEP_PARAMETERS)
    p.add_argument("--values", default="", help="comma-separated values")
    p.add_argument("--log-range", nargs=3, metavar=("LO", "HI", "N"), help="log-spaced frequencies (transmitter_hz)")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args.func(args)
    except (EventVLCError, OSError) as exc:
        print(f"eventvlc: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

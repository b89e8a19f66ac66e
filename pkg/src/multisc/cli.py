"""Command line front end.

Subcommands:
    sweep   run an SNR sweep in-process and write the results CSV
    serve   run the receiver half of the two-process mode
    send    run the transmitter half against a remote receiver
    demo    run one scene end to end and write the reconstruction

The MULTISC_BACKEND environment variable overrides any --backend flag, so
a deployment can point every invocation at one model server without
touching scripts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .bridge import BridgeClient
from .channel import ChannelConfig
from .metrics import CSV_HEADER, report_row
from .netmode import (
    ConnectionLost,
    ReceiverServer,
    reports_to_csv,
    send_transmitter,
)
from .pipeline import RunConfig, run_scene, snr_sweep
from .scene import rasterize, scene_from_json, write_ppm
from .vision import blocks_to_json, detect_blocks, fuse_blocks

DEFAULT_EPSILON = 51.0

_GNUPLOT_TEMPLATE = """\
# generated companion script: plots per-SNR summary rows from {csv}
set datafile separator ","
set key autotitle columnhead
set xlabel "SNR (dB)"
set ylabel "score"
set yrange [0:1.05]
set grid
set terminal pngcairo size 800,600
set output "{png}"
plot "{csv}" using (strcol(6) eq "mean" ? column(1) : NaN):(column(3)) \\
         with linespoints title "mean cosine", \\
     "{csv}" using (strcol(6) eq "mean" ? column(1) : NaN):(column(4)) \\
         with linespoints title "mean bleu"
"""


def parse_snr_grid(text: str) -> tuple[float, ...]:
    """Grid syntax: 'start:stop:step' (stop kept only if hit exactly),
    a comma list '0,3,9,19', or a single value; 'inf' is noiseless."""
    if ":" in text:
        try:
            start, stop, step = (float(p) for p in text.split(":"))
        except ValueError:
            raise ValueError(f"bad grid {text!r}, expected start:stop:step") from None
        if step <= 0:
            raise ValueError("grid step must be positive")
        values = []
        k = 0
        while start + k * step <= stop + 1e-9:
            values.append(start + k * step)
            k += 1
        if not values:
            raise ValueError(f"grid {text!r} is empty")
        return tuple(values)
    return tuple(float(p) for p in text.split(","))


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--channel", choices=("awgn", "rayleigh"), default="awgn")
    parser.add_argument("--snr", default="0:19:3", metavar="GRID",
                        help="start:stop:step, comma list, or single value")
    parser.add_argument("--scenes", type=int, default=10)
    parser.add_argument("--objects", type=int, default=3)
    parser.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON,
                        help="center-distance fusion threshold in pixels")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--sub-prob", type=float, default=None,
                        help="fix the corrector substitution rate instead of calibrating")
    parser.add_argument("--backend", default=None, metavar="HOST:PORT",
                        help="model server for lpips scoring")


def _run_config(args, snr_grid: tuple[float, ...], output_path: str | None) -> RunConfig:
    return RunConfig(
        channel=ChannelConfig(kind=args.channel, snr_db=snr_grid[0], seed=args.seed),
        epsilon=args.epsilon,
        num_scenes=args.scenes,
        objects_per_scene=args.objects,
        snr_grid=snr_grid,
        backend=_resolve_backend(args),
        output_path=output_path,
        master_seed=args.seed,
        sub_prob=args.sub_prob,
    )


def _resolve_backend(args) -> str | None:
    return os.environ.get("MULTISC_BACKEND") or args.backend


def _open_backend(endpoint: str | None):
    return BridgeClient(endpoint) if endpoint else None


def _cmd_sweep(args) -> int:
    grid = parse_snr_grid(args.snr)
    config = _run_config(args, grid, args.out)
    backend = _open_backend(config.backend)
    try:
        path = snr_sweep(config, backend=backend)
    finally:
        if backend:
            backend.close()
    print(f"wrote {path}")
    if args.gnuplot:
        base, _ = os.path.splitext(path)
        script = _GNUPLOT_TEMPLATE.format(csv=path, png=base + ".png")
        with open(base + ".gnuplot", "w", encoding="utf-8") as f:
            f.write(script)
        print(f"wrote {base}.gnuplot")
    return 0


def _cmd_serve(args) -> int:
    if args.out:
        os.makedirs(args.out, exist_ok=True)
    server = ReceiverServer(port=args.port, host=args.host, out_dir=args.out,
                            backend=_open_backend(_resolve_backend(args)))
    # announce the bound port first: with --port 0 the OS picks it
    print(f"LISTENING {server.port}", flush=True)
    try:
        server.serve(max_sessions=args.max_sessions)
    except KeyboardInterrupt:
        pass
    print(f"served {server.sessions_handled} sessions, "
          f"skipped {server.frames_skipped} frames")
    return 0


def _cmd_send(args) -> int:
    grid = parse_snr_grid(args.snr)
    config = _run_config(args, grid, args.out)
    reports = send_transmitter(args.to, config)
    if args.out:
        reports_to_csv(reports, config.num_scenes, args.out)
        print(f"wrote {args.out}")
    else:
        print(CSV_HEADER)
        for report in reports:
            print(report_row(report))
    return 0


def _cmd_demo(args) -> int:
    with open(args.scene, "r", encoding="utf-8") as f:
        spec = scene_from_json(f.read())
    grid = (args.snr,)
    config = RunConfig(
        channel=ChannelConfig(kind=args.channel, snr_db=args.snr, seed=args.seed),
        epsilon=args.epsilon,
        num_scenes=1,
        objects_per_scene=len(spec.objects),
        snr_grid=grid,
        backend=_resolve_backend(args),
        output_path=args.out,
        master_seed=args.seed,
        sub_prob=args.sub_prob,
    )
    if args.dump_blocks:
        image = rasterize(spec)
        blocks = fuse_blocks(image, detect_blocks(image), config.epsilon)
        with open(args.dump_blocks, "w", encoding="utf-8") as f:
            f.write(blocks_to_json(blocks) + "\n")
    backend = _open_backend(config.backend)
    try:
        result = run_scene(spec, config, backend=backend)
    finally:
        if backend:
            backend.close()
    write_ppm(result.reconstruction, args.out)
    print(CSV_HEADER)
    print(report_row(result.report))
    print(json.dumps(result.diagnostics))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multisc",
        description="image-to-captions semantic transmission simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run an SNR sweep, write CSV")
    _add_run_options(sweep)
    sweep.add_argument("--out", required=True, metavar="CSV")
    sweep.add_argument("--gnuplot", action="store_true",
                       help="also emit a companion plotting script")
    sweep.set_defaults(func=_cmd_sweep)

    serve = sub.add_parser("serve", help="receiver half of the socket mode")
    serve.add_argument("--port", type=int, required=True,
                       help="TCP port; 0 lets the OS pick (printed on start)")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--out", default=None, metavar="DIR",
                       help="write per-session reconstructions and reports here")
    serve.add_argument("--backend", default=None, metavar="HOST:PORT")
    serve.add_argument("--max-sessions", type=int, default=None,
                       help="exit after this many sessions (default: run forever)")
    serve.set_defaults(func=_cmd_serve)

    send = sub.add_parser("send", help="transmitter half of the socket mode")
    send.add_argument("--to", required=True, metavar="HOST:PORT")
    _add_run_options(send)
    send.add_argument("--out", default=None, metavar="CSV",
                      help="write collected reports as a sweep CSV")
    send.set_defaults(func=_cmd_send)

    demo = sub.add_parser("demo", help="run one scene end to end")
    demo.add_argument("--scene", required=True, metavar="JSON",
                      help="scene description file")
    demo.add_argument("--snr", type=float, default=9.0)
    demo.add_argument("--channel", choices=("awgn", "rayleigh"), default="awgn")
    demo.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    demo.add_argument("--seed", type=int, default=42)
    demo.add_argument("--sub-prob", type=float, default=None)
    demo.add_argument("--backend", default=None, metavar="HOST:PORT")
    demo.add_argument("--out", required=True, metavar="PPM",
                      help="reconstruction image path")
    demo.add_argument("--dump-blocks", default=None, metavar="JSON",
                      help="also write the fused block list for debugging")
    demo.set_defaults(func=_cmd_demo)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, ConnectionLost) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

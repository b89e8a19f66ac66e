"""Two-process mode: transmitter and receiver talk over a TCP socket.

One connection carries one session, which is one scene at one channel
point. The transmitter runs the channel locally and ships the already
corrupted payloads, framed, behind a JSON session header; the receiver
decodes, corrects, recomposes, and scores with the same receive path the
in-process runner uses, then answers with the report. Identical payload
bytes in means identical reports out, so both modes agree byte for byte.

Session layout on the wire, transmitter to receiver:

    uint32 LE header length | header JSON | frame | frame | ...

The header carries the scene document, the channel settings, and one
manifest entry per stream with its exact frame length, so the receiver
can keep resynchronizing even when a frame arrives damaged: it reads the
declared byte count, and a frame that fails to decode is skipped and
counted rather than aborting the session. Streams lost to a deep fade
have no frame on the wire (frame_len 0, lost true).

The receiver answers with one JSON document the same way:

    uint32 LE length | {"report": ..., "diagnostics": ..., "skipped_frames": n}
"""

from __future__ import annotations

import json
import os
import socket
import struct
from dataclasses import replace

from .bridge import parse_endpoint
from .channel import (
    BadMagic,
    BadVersion,
    ChannelConfig,
    Truncated,
    decode_frame,
    encode_frame,
)
from .metrics import CSV_HEADER, MetricsReport, report_row, summary_row
from .pipeline import RunConfig, receive_scene, scene_seed, transmit_scene
from .scene import (
    SceneSpec,
    generate_scene,
    scene_from_json,
    scene_to_json,
    write_ppm,
)

_LEN = struct.Struct("<I")

# guard against a garbled header asking us to buffer gigabytes
MAX_DOC_BYTES = 1 << 24
MAX_FRAME_BYTES = 1 << 28

DEFAULT_TIMEOUT = 30.0


class ConnectionLost(Exception):
    """Peer vanished or refused mid-session."""


class SessionError(Exception):
    """Session header or framing was malformed beyond recovery."""


# ---------------------------------------------------------------------------
# length-prefixed JSON documents

def _read_exact(sock: socket.socket, count: int) -> bytes:
    chunks = []
    remaining = count
    while remaining:
        try:
            chunk = sock.recv(min(remaining, 65536))
        except OSError as exc:
            raise ConnectionLost(str(exc)) from exc
        if not chunk:
            raise ConnectionLost(f"peer closed with {remaining} bytes pending")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def _send_doc(sock: socket.socket, doc: dict) -> None:
    body = json.dumps(doc, separators=(",", ":")).encode("utf-8")
    try:
        sock.sendall(_LEN.pack(len(body)) + body)
    except OSError as exc:
        raise ConnectionLost(str(exc)) from exc


def _read_doc(sock: socket.socket) -> dict:
    (length,) = _LEN.unpack(_read_exact(sock, _LEN.size))
    if length > MAX_DOC_BYTES:
        raise SessionError(f"document of {length} bytes exceeds limit")
    body = _read_exact(sock, length)
    try:
        doc = json.loads(body.decode("utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SessionError(f"undecodable document: {exc}") from exc
    if not isinstance(doc, dict):
        raise SessionError("document must be a JSON object")
    return doc


# ---------------------------------------------------------------------------
# session encoding

def session_messages(spec: SceneSpec, config: RunConfig) -> tuple[bytes, list[bytes]]:
    """Build one session: the length-prefixed header and the frame bytes.

    Runs the transmitter half (including the channel) and lays the streams
    out in stream id order. Lost streams appear in the manifest only.
    """
    streams = sorted(transmit_scene(spec, config), key=lambda s: s.stream_id)
    entries = []
    frames = []
    for s in streams:
        if s.lost:
            entries.append({"stream_id": s.stream_id, "payload_type": s.payload_type,
                            "frame_len": 0, "lost": True})
            continue
        frame = encode_frame(s.payload_type, s.stream_id, s.payload)
        entries.append({"stream_id": s.stream_id, "payload_type": s.payload_type,
                        "frame_len": len(frame), "lost": False})
        frames.append(frame)
    header = {
        "scene": json.loads(scene_to_json(spec)),
        "channel": {"kind": config.channel.kind, "snr_db": config.channel.snr_db,
                    "seed": config.channel.seed},
        "epsilon": config.epsilon,
        "master_seed": config.master_seed,
        "sub_prob": config.sub_prob,
        "streams": entries,
    }
    body = json.dumps(header, separators=(",", ":")).encode("utf-8")
    return _LEN.pack(len(body)) + body, frames


def _config_from_header(header: dict) -> tuple[SceneSpec, RunConfig]:
    try:
        spec = scene_from_json(json.dumps(header["scene"]))
        chan = header["channel"]
        config = RunConfig(
            channel=ChannelConfig(kind=str(chan["kind"]),
                                  snr_db=float(chan["snr_db"]),
                                  seed=int(chan["seed"])),
            epsilon=float(header["epsilon"]),
            num_scenes=1,
            objects_per_scene=len(spec.objects),
            snr_grid=(float(chan["snr_db"]),),
            backend=None,
            output_path=None,
            master_seed=int(header["master_seed"]),
            sub_prob=header["sub_prob"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SessionError(f"bad session header: {exc}") from exc
    return spec, config


def _report_to_doc(report: MetricsReport) -> dict:
    return {
        "snr_db": report.snr_db,
        "channel_kind": report.channel_kind,
        "cosine": report.cosine,
        "bleu": report.bleu,
        "lpips": report.lpips,
        "scene_seed": report.scene_seed,
        "recovered_objects": report.recovered_objects,
        "source_objects": report.source_objects,
    }


def _report_from_doc(doc: dict) -> MetricsReport:
    return MetricsReport(
        snr_db=float(doc["snr_db"]),
        channel_kind=str(doc["channel_kind"]),
        cosine=float(doc["cosine"]),
        bleu=float(doc["bleu"]),
        lpips=None if doc["lpips"] is None else float(doc["lpips"]),
        scene_seed=int(doc["scene_seed"]),
        recovered_objects=int(doc["recovered_objects"]),
        source_objects=int(doc["source_objects"]),
    )


# ---------------------------------------------------------------------------
# receiver

class ReceiverServer:
    """Accepts one session per connection and answers with the report.

    Bind with port 0 to let the OS pick; the chosen port is in .port.
    serve() blocks; call stop() from another thread to end it, or pass
    max_sessions for a bounded run.
    """

    def __init__(self, port: int = 0, host: str = "127.0.0.1",
                 out_dir: str | None = None, backend=None):
        self.out_dir = out_dir
        self.backend = backend
        self.sessions_handled = 0
        self.frames_skipped = 0
        self.last_error = None
        self._stopping = False
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((host, port))
        self._listener.listen(1)
        # poll accept so stop() takes effect; a plain close does not wake it
        self._listener.settimeout(0.1)
        self.port = self._listener.getsockname()[1]

    def serve(self, max_sessions: int | None = None) -> None:
        try:
            while not self._stopping:
                if max_sessions is not None and self.sessions_handled >= max_sessions:
                    break
                try:
                    conn, _ = self._listener.accept()
                except socket.timeout:
                    continue
                with conn:
                    conn.settimeout(DEFAULT_TIMEOUT)
                    try:
                        self._handle_session(conn)
                    except Exception as exc:
                        # bad input must not kill the server; session aborted
                        self.last_error = repr(exc)
        finally:
            self._listener.close()

    def stop(self) -> None:
        self._stopping = True

    def _handle_session(self, conn: socket.socket) -> None:
        header = _read_doc(conn)
        spec, config = _config_from_header(header)
        payloads: dict[int, bytes | None] = {}
        skipped = 0
        for entry in header["streams"]:
            stream_id = int(entry["stream_id"])
            if entry["lost"]:
                payloads[stream_id] = None
                continue
            frame_len = int(entry["frame_len"])
            if not 0 <= frame_len <= MAX_FRAME_BYTES:
                raise SessionError(f"frame length {frame_len} out of range")
            raw = _read_exact(conn, frame_len)
            try:
                frame = decode_frame(raw)
                if (frame.stream_id != stream_id
                        or frame.payload_type != int(entry["payload_type"])):
                    raise BadMagic("frame does not match its manifest entry")
                payloads[stream_id] = frame.payload
            except (BadMagic, BadVersion, Truncated):
                # damaged frame: manifest length kept us aligned, drop it
                payloads[stream_id] = None
                skipped += 1
        self.frames_skipped += skipped

        result = receive_scene(spec, config, payloads, backend=self.backend)
        if self.out_dir:
            self._write_outputs(result, skipped)
        # count before answering so a peer that got its answer sees the count
        self.sessions_handled += 1
        _send_doc(conn, {"report": _report_to_doc(result.report),
                         "diagnostics": result.diagnostics,
                         "skipped_frames": skipped})

    def _write_outputs(self, result, skipped: int) -> None:
        index = self.sessions_handled
        write_ppm(result.reconstruction,
                  os.path.join(self.out_dir, f"session_{index:04d}.ppm"))
        record = {"report": _report_to_doc(result.report),
                  "diagnostics": result.diagnostics,
                  "skipped_frames": skipped}
        path = os.path.join(self.out_dir, f"session_{index:04d}.json")
        with open(path, "w", encoding="utf-8") as f:
            json.dump(record, f, indent=2)
            f.write("\n")


def serve_receiver(port: int, host: str = "127.0.0.1",
                   out_dir: str | None = None, backend=None,
                   max_sessions: int | None = None) -> ReceiverServer:
    """Run a receiver until max_sessions sessions are done (None = forever)."""
    server = ReceiverServer(port=port, host=host, out_dir=out_dir, backend=backend)
    server.serve(max_sessions=max_sessions)
    return server


# ---------------------------------------------------------------------------
# transmitter

def send_session(endpoint: str, spec: SceneSpec, config: RunConfig) -> tuple[MetricsReport, dict]:
    """Transmit one scene to a receiver; returns its report and diagnostics."""
    host, port = parse_endpoint(endpoint)
    header, frames = session_messages(spec, config)
    try:
        with socket.create_connection((host, port), timeout=DEFAULT_TIMEOUT) as sock:
            sock.sendall(header)
            for frame in frames:
                sock.sendall(frame)
            answer = _read_doc(sock)
    except OSError as exc:
        raise ConnectionLost(f"no receiver at {endpoint}: {exc}") from exc
    try:
        return _report_from_doc(answer["report"]), answer
    except (KeyError, TypeError, ValueError) as exc:
        raise SessionError(f"bad receiver answer: {exc}") from exc


def send_transmitter(endpoint: str, config: RunConfig) -> list[MetricsReport]:
    """Run the configured sweep against a remote receiver.

    Scenes and their seeds are derived exactly as the in-process sweep
    derives them, and sessions go out SNR-major then scene-minor, so the
    collected reports line up row for row with the local runner's output.
    """
    specs = [generate_scene(seed=scene_seed(config.master_seed, i),
                            num_objects=config.objects_per_scene)
             for i in range(config.num_scenes)]
    reports = []
    for snr_db in config.snr_grid:
        point = replace(config, channel=replace(config.channel, snr_db=snr_db))
        for spec in specs:
            report, _ = send_session(endpoint, spec, point)
            reports.append(report)
    return reports


def reports_to_csv(reports: list[MetricsReport], num_scenes: int, path: str) -> str:
    """Write detail rows plus one summary per SNR point, sweep layout."""
    if num_scenes < 1 or len(reports) % num_scenes:
        raise ValueError("reports must come in whole per-SNR groups")
    groups = [reports[i:i + num_scenes] for i in range(0, len(reports), num_scenes)]
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(CSV_HEADER + "\n")
        for group in groups:
            for report in group:
                f.write(report_row(report) + "\n")
        for group in groups:
            f.write(summary_row(group) + "\n")
    return path

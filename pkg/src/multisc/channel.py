"""Analog channel simulation over framed payloads.

Payload samples (embedding floats, or pixels mapped to [-1, 1]) are paired
into complex symbols, normalized to unit mean power, and pushed through
either AWGN (h = 1) or block-fading Rayleigh (one complex gain per frame,
unit mean square). Noise draws come from a counter-based generator keyed by
(seed, stream_id), so streams are reproducible and independent regardless of
transmission order, and the same key at two SNR points sees the same noise
shape scaled by sigma.

Structural bytes ride outside the analog path: the frame header, and the
short payload prefix that gives the sample block its shape (embedding dim,
or image width/height/channels). Only samples take noise. Power scale and
pad flag travel out of band with the block, an idealization that keeps the
configured SNR exact per frame.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .semantics import TextEmbedding

FRAME_MAGIC = b"MSC1"
FRAME_VERSION = 1
PAYLOAD_IMAGE = 0
PAYLOAD_EMBEDDING = 1

_FRAME_HEADER = struct.Struct("<4sBBHI")  # magic, version, type, stream_id, payload_len
_EMB_PREFIX = struct.Struct("<i")  # dim
_IMG_PREFIX = struct.Struct("<iiB")  # width, height, channels

DEEP_FADE_THRESHOLD = 1e-6


class NonPositivePower(Exception):
    pass


class DeepFade(Exception):
    """Channel gain too small to equalize; the frame is lost."""


class BadMagic(Exception):
    pass


class BadVersion(Exception):
    pass


class Truncated(Exception):
    pass


@dataclass(frozen=True)
class ChannelConfig:
    kind: str  # "awgn" or "rayleigh"
    snr_db: float
    seed: int

    def __post_init__(self):
        if self.kind not in ("awgn", "rayleigh"):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        # +inf is the noiseless sentinel; NaN and -inf are meaningless
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise ValueError(f"invalid snr_db {self.snr_db}")


@dataclass(frozen=True)
class Frame:
    payload_type: int
    stream_id: int
    payload: bytes


@dataclass(frozen=True)
class SymbolBlock:
    symbols: np.ndarray  # complex128
    scale: float  # multiplier that was applied to reach unit mean power
    pad: bool  # one zero real appended to even the count
    payload_type: int
    prefix: bytes  # structural payload bytes, not transmitted as samples


def snr_to_noise_variance(snr_db: float, signal_power: float) -> float:
    """Total complex noise variance for a target SNR (half per component)."""
    if signal_power <= 0:
        raise NonPositivePower(f"signal power {signal_power} must be positive")
    if snr_db == math.inf:
        return 0.0
    return signal_power / 10.0 ** (snr_db / 10.0)


def _stream_rng(seed: int, stream_id: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=[seed & (2 ** 64 - 1), stream_id & 0xFFFF])
    return np.random.Generator(np.random.Philox(ss))


def _split_payload(payload: bytes, payload_type: int) -> tuple[bytes, np.ndarray]:
    """Split a payload into its structural prefix and real-valued samples."""
    if payload_type == PAYLOAD_EMBEDDING:
        n = _EMB_PREFIX.size
        reals = np.frombuffer(payload[n:], dtype="<f4").astype(np.float64)
        return payload[:n], reals
    if payload_type == PAYLOAD_IMAGE:
        n = _IMG_PREFIX.size
        samples = np.frombuffer(payload[n:], dtype=np.uint8)
        return payload[:n], samples.astype(np.float64) / 127.5 - 1.0
    raise ValueError(f"unknown payload type {payload_type}")


def _join_payload(prefix: bytes, reals: np.ndarray, payload_type: int) -> bytes:
    if payload_type == PAYLOAD_EMBEDDING:
        return prefix + reals.astype("<f4").tobytes()
    samples = np.clip(np.rint((reals + 1.0) * 127.5), 0, 255).astype(np.uint8)
    return prefix + samples.tobytes()


def modulate(payload: bytes, payload_type: int) -> SymbolBlock:
    """Turn payload samples into a unit-mean-power complex symbol block."""
    prefix, reals = _split_payload(payload, payload_type)
    pad = len(reals) % 2 == 1
    if pad:
        reals = np.append(reals, 0.0)
    symbols = reals[0::2] + 1j * reals[1::2]
    power = float(np.mean(np.abs(symbols) ** 2)) if len(symbols) else 0.0
    scale = 1.0 / math.sqrt(power) if power > 0 else 1.0
    return SymbolBlock(symbols=symbols * scale, scale=scale, pad=pad,
                       payload_type=payload_type, prefix=prefix)


def demodulate(block: SymbolBlock) -> bytes:
    """Invert modulate: undo scaling, unpair, map samples back to bytes."""
    symbols = block.symbols / block.scale
    reals = np.empty(2 * len(symbols), dtype=np.float64)
    reals[0::2] = symbols.real
    reals[1::2] = symbols.imag
    if block.pad:
        reals = reals[:-1]
    return _join_payload(block.prefix, reals, block.payload_type)


def transmit(block: SymbolBlock, config: ChannelConfig,
             stream_id: int) -> tuple[SymbolBlock, complex]:
    """Apply gain and additive noise: received = h * sent + noise.

    AWGN fixes h = 1; Rayleigh draws one h per frame with E[|h|^2] = 1
    (block fading). Per-symbol noise is circularly symmetric complex
    Gaussian with total variance sigma^2 set by the configured SNR against
    the unit-power signal.
    """
    n = len(block.symbols)
    if n and abs(float(np.mean(np.abs(block.symbols) ** 2)) - 1.0) > 1e-6:
        if np.any(block.symbols != 0):
            raise ValueError("block is not normalized to unit mean power")
    rng = _stream_rng(config.seed, stream_id)
    if config.kind == "rayleigh":
        g = rng.standard_normal(2)
        h = complex(g[0], g[1]) / math.sqrt(2.0)
    else:
        h = 1.0 + 0.0j
    sigma2 = snr_to_noise_variance(config.snr_db, 1.0)
    received = h * block.symbols
    if sigma2 > 0.0 and n:
        noise = rng.standard_normal(2 * n) * math.sqrt(sigma2 / 2.0)
        received = received + (noise[0::2] + 1j * noise[1::2])
    return SymbolBlock(symbols=received, scale=block.scale, pad=block.pad,
                       payload_type=block.payload_type, prefix=block.prefix), h


def equalize(received: SymbolBlock, h: complex) -> SymbolBlock:
    """Divide out the known channel gain (perfect CSI)."""
    if abs(h) < DEEP_FADE_THRESHOLD:
        raise DeepFade(f"|h| = {abs(h):.3g} below {DEEP_FADE_THRESHOLD}")
    return SymbolBlock(symbols=received.symbols / h, scale=received.scale,
                       pad=received.pad, payload_type=received.payload_type,
                       prefix=received.prefix)


def transmit_payload(payload: bytes, payload_type: int, config: ChannelConfig,
                     stream_id: int) -> tuple[bytes, bool]:
    """Payload in, corrupted payload out. Returns (payload, lost).

    A deep fade keeps the payload bytes unchanged but flags the frame lost;
    callers decide what a lost frame means downstream.
    """
    block = modulate(payload, payload_type)
    received, h = transmit(block, config, stream_id)
    try:
        return demodulate(equalize(received, h)), False
    except DeepFade:
        return payload, True


# ---------------------------------------------------------------------------
# frame codec

def encode_frame(payload_type: int, stream_id: int, payload: bytes) -> bytes:
    if len(payload) >= 2 ** 32:
        raise ValueError("payload too large for 32-bit length")
    return _FRAME_HEADER.pack(FRAME_MAGIC, FRAME_VERSION, payload_type,
                              stream_id, len(payload)) + payload


def decode_frame(data: bytes) -> Frame:
    """Decode one frame from the start of `data`; trailing bytes ignored."""
    if len(data) < _FRAME_HEADER.size:
        raise Truncated(f"{len(data)} bytes, header needs {_FRAME_HEADER.size}")
    magic, version, payload_type, stream_id, payload_len = _FRAME_HEADER.unpack_from(data)
    if magic != FRAME_MAGIC:
        raise BadMagic(f"bad magic {magic!r}")
    if version != FRAME_VERSION:
        raise BadVersion(f"unsupported version {version}")
    end = _FRAME_HEADER.size + payload_len
    if len(data) < end:
        raise Truncated(f"payload declares {payload_len} bytes, {len(data) - _FRAME_HEADER.size} present")
    return Frame(payload_type=payload_type, stream_id=stream_id,
                 payload=bytes(data[_FRAME_HEADER.size:end]))


def frame_length(payload_len: int) -> int:
    return _FRAME_HEADER.size + payload_len


# ---------------------------------------------------------------------------
# payload builders

def embedding_payload(emb: TextEmbedding) -> bytes:
    return _EMB_PREFIX.pack(emb.dim) + emb.rows.astype("<f4").tobytes()


def parse_embedding_payload(payload: bytes) -> TextEmbedding:
    (dim,) = _EMB_PREFIX.unpack_from(payload)
    if dim <= 0:
        raise ValueError(f"bad embedding dim {dim}")
    body = payload[_EMB_PREFIX.size:]
    if len(body) % (4 * dim) != 0:
        raise ValueError("embedding payload length is not a whole number of rows")
    rows = np.frombuffer(body, dtype="<f4").reshape(-1, dim)
    return TextEmbedding(dim=dim, rows=rows.copy())


def image_payload(image: np.ndarray) -> bytes:
    h, w = image.shape[:2]
    channels = 1 if image.ndim == 2 else image.shape[2]
    return _IMG_PREFIX.pack(w, h, channels) + np.ascontiguousarray(image, np.uint8).tobytes()


def parse_image_payload(payload: bytes) -> np.ndarray:
    w, h, channels = _IMG_PREFIX.unpack_from(payload)
    if w <= 0 or h <= 0 or channels not in (1, 3):
        raise ValueError(f"bad image prefix {w}x{h}x{channels}")
    body = payload[_IMG_PREFIX.size:]
    if len(body) != w * h * channels:
        raise ValueError("image payload length does not match its prefix")
    samples = np.frombuffer(body, dtype=np.uint8)
    shape = (h, w) if channels == 1 else (h, w, channels)
    return samples.reshape(shape).copy()

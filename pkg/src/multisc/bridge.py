"""Client for an external model backend over length-prefixed JSON.

Wire format: 4-byte little-endian message length, then UTF-8 JSON. Requests
carry a per-connection strictly increasing id and a method name; every
request gets exactly one response, in order. Images travel as raw RGB8
bytes, base64-encoded, alongside explicit width/height, so both ends agree
on pixels without any codec.

The backend process itself lives outside this package; anything speaking
the protocol can serve. A caller plugs the client in wherever a learned
model would replace a built-in stand-in (captioning, correction,
reconstruction, perceptual distance).
"""

from __future__ import annotations

import base64
import json
import socket
import struct

import numpy as np

BRIDGE_METHODS = ("caption", "correct", "reconstruct", "lpips", "segment", "health")

_LEN = struct.Struct("<I")

DEFAULT_TIMEOUT = 10.0


class BridgeError(Exception):
    """Backend answered with an error document."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


class ProtocolError(Exception):
    """Transport-level failure: bad framing, closed stream, id mismatch."""


def encode_message(doc: dict) -> bytes:
    body = json.dumps(doc, separators=(",", ":")).encode("utf-8")
    return _LEN.pack(len(body)) + body


def read_message(stream) -> dict:
    header = _read_exact(stream, _LEN.size)
    (length,) = _LEN.unpack(header)
    return json.loads(_read_exact(stream, length).decode("utf-8"))


def _read_exact(stream, n: int) -> bytes:
    chunks = []
    remaining = n
    while remaining:
        chunk = stream.recv(remaining)
        if not chunk:
            raise ProtocolError(f"stream closed with {remaining} bytes outstanding")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def image_to_doc(image: np.ndarray) -> dict:
    if image.ndim == 2:
        image = np.repeat(image[:, :, None], 3, axis=2)
    h, w = image.shape[:2]
    raw = np.ascontiguousarray(image, dtype=np.uint8).tobytes()
    return {"width": w, "height": h,
            "data": base64.b64encode(raw).decode("ascii")}


def doc_to_image(doc: dict) -> np.ndarray:
    w, h = int(doc["width"]), int(doc["height"])
    raw = base64.b64decode(doc["data"])
    if len(raw) != w * h * 3:
        raise ProtocolError(f"image data {len(raw)} bytes, expected {w * h * 3}")
    return np.frombuffer(raw, dtype=np.uint8).reshape(h, w, 3).copy()


def parse_endpoint(endpoint: str) -> tuple[str, int]:
    host, sep, port = endpoint.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"endpoint {endpoint!r} is not host:port")
    return host or "127.0.0.1", int(port)


class BridgeClient:
    """One connection to a backend; call methods, get plain Python values."""

    def __init__(self, endpoint: str, timeout: float = DEFAULT_TIMEOUT):
        host, port = parse_endpoint(endpoint)
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._next_id = 1

    def close(self) -> None:
        self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def request(self, method: str, params: dict) -> dict:
        req_id = self._next_id
        self._next_id += 1
        self._sock.sendall(encode_message(
            {"id": req_id, "method": method, "params": params}))
        response = read_message(self._sock)
        if response.get("id") != req_id:
            raise ProtocolError(f"response id {response.get('id')} for request {req_id}")
        if not response.get("ok"):
            err = response.get("error") or {}
            raise BridgeError(err.get("code", "ModelFailure"),
                              err.get("message", "backend error"))
        return response["result"]

    # method wrappers ------------------------------------------------------

    def health(self) -> dict:
        return self.request("health", {})

    def caption(self, image: np.ndarray, query: str) -> str:
        result = self.request("caption", {"image": image_to_doc(image), "query": query})
        return result["caption"]

    def correct(self, text: str) -> str:
        return self.request("correct", {"text": text})["text"]

    def reconstruct(self, captions: list[str], image: np.ndarray | None,
                    lam: float, width: int, height: int) -> np.ndarray:
        params = {
            "captions": list(captions),
            "image": image_to_doc(image) if image is not None else None,
            "lambda": lam,
            "width": width,
            "height": height,
        }
        return doc_to_image(self.request("reconstruct", params)["image"])

    def lpips(self, a: np.ndarray, b: np.ndarray) -> float:
        result = self.request("lpips", {"a": image_to_doc(a), "b": image_to_doc(b)})
        return float(result["lpips"])

    def segment(self, image: np.ndarray) -> dict:
        return self.request("segment", {"image": image_to_doc(image)})["bbox"]

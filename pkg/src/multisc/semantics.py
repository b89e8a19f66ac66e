"""Text-side semantic codec: caption embedding and nearest-neighbor decode.

Captions over the scene grammar are embedded token by token against a seeded
table of unit-norm pseudo-random rows. Unit-norm random rows in a moderate
dimension are far apart, so each token has a concrete noise margin: a noisy
row still decodes correctly as long as the perturbation stays under half the
minimum pairwise row distance.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .scene import COLORS, SHAPES
from .vision import Block

UNK = "<unk>"

# Fixed instruction the captioner is asked with; kept verbatim so captions
# produced by an external backend are comparable across runs.
QUERY = "<image>\nRelay a brief, clear account of the picture shown."

TABLE_MAGIC = b"SEMT"
TABLE_VERSION = 1
DEFAULT_DIM = 32

_HEADER = struct.Struct("<4sBii")


class DimensionMismatch(Exception):
    """Matrix or embedding dimensions do not line up."""


class UnmatchedBlock(Exception):
    """Block contains no known object center."""


@dataclass(frozen=True)
class Vocab:
    tokens: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("vocabulary tokens must be unique")
        if not self.tokens or self.tokens[0] != UNK:
            raise ValueError(f"{UNK!r} must sit at index 0")

    @property
    def size(self) -> int:
        return len(self.tokens)

    def index(self, token: str) -> int:
        try:
            return self.tokens.index(token)
        except ValueError:
            return 0


def default_vocab() -> Vocab:
    """Grammar words of the caption language, UNK first."""
    grid_words = ("top", "left", "right", "bottom", "center")
    return Vocab((UNK, "a", "at") + COLORS + SHAPES + grid_words)


@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    vectors: np.ndarray  # (vocab size, dim) float32, unit-norm rows
    seed: int
    vocab: Vocab

    def __post_init__(self):
        if self.vectors.shape != (self.vocab.size, self.dim):
            raise ValueError("vector block does not match vocab size and dim")
        norms = np.linalg.norm(self.vectors.astype(np.float64), axis=1)
        if not np.allclose(norms, 1.0, atol=1e-6):
            raise ValueError("rows must be unit norm")
        if min_row_distance(self.vectors) == 0.0:
            raise ValueError("rows must be pairwise distinct")


@dataclass(frozen=True)
class TextEmbedding:
    dim: int
    rows: np.ndarray  # (token count, dim) float32


def min_row_distance(vectors: np.ndarray) -> float:
    v = vectors.astype(np.float64)
    diff = v[:, None, :] - v[None, :, :]
    dist = np.sqrt((diff ** 2).sum(-1))
    n = len(v)
    return float(dist[~np.eye(n, dtype=bool)].min()) if n > 1 else np.inf


def make_table(vocab: Vocab, seed: int = 0, dim: int = DEFAULT_DIM) -> EmbeddingTable:
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((vocab.size, dim))
    unit = raw / np.linalg.norm(raw, axis=1, keepdims=True)
    return EmbeddingTable(dim=dim, vectors=unit.astype(np.float32), seed=seed, vocab=vocab)


def embed_text(caption: str, table: EmbeddingTable) -> TextEmbedding:
    """One table row per whitespace token; unknown tokens become UNK."""
    indices = [table.vocab.index(tok) for tok in caption.split()]
    rows = table.vectors[indices] if indices else np.empty((0, table.dim), np.float32)
    return TextEmbedding(dim=table.dim, rows=rows.copy())


def decode_embedding(noisy: TextEmbedding, table: EmbeddingTable) -> str:
    """Map each row to the vocab token with maximal cosine similarity.

    Table rows are unit norm, so the cosine argmax equals the dot-product
    argmax; ties (including all-zero rows) resolve to the lowest index.
    """
    if noisy.dim != table.dim:
        raise DimensionMismatch(f"embedding dim {noisy.dim} vs table dim {table.dim}")
    if noisy.rows.shape[0] == 0:
        return ""
    scores = noisy.rows.astype(np.float64) @ table.vectors.astype(np.float64).T
    return " ".join(table.vocab.tokens[i] for i in scores.argmax(axis=1))


def project_features(Z_v: TextEmbedding, W: np.ndarray) -> TextEmbedding:
    """Apply a square projection to every row: H = Z · W."""
    W = np.asarray(W)
    if W.ndim != 2 or W.shape[0] != W.shape[1] or W.shape[0] != Z_v.dim:
        raise DimensionMismatch(f"projection {W.shape} does not match dim {Z_v.dim}")
    return TextEmbedding(dim=Z_v.dim, rows=(Z_v.rows @ W).astype(np.float32))


def stub_caption(block: Block, spec) -> str:
    """Caption a block from scene ground truth, fused entries joined by "; ".

    Stands in for a learned captioner: every scene object whose center lies
    inside the block's extent contributes its ground-truth caption, in spec
    order. A block covering no object center raises UnmatchedBlock.
    """
    from .scene import caption_for

    x0, y0, x1, y1 = block.bbox.extent()
    captions = [caption_for(o, spec.width, spec.height)
                for o in spec.objects
                if x0 <= o.cx < x1 and y0 <= o.cy < y1]
    if not captions:
        raise UnmatchedBlock(f"no object center inside extent ({x0},{y0},{x1},{y1})")
    return "; ".join(captions)


# ---------------------------------------------------------------------------
# persistence: binary table + UTF-8 vocabulary sidecar

def vocab_sidecar_path(path) -> Path:
    return Path(str(path) + ".vocab")


def save_table(table: EmbeddingTable, path) -> None:
    with open(path, "wb") as f:
        f.write(_HEADER.pack(TABLE_MAGIC, TABLE_VERSION, table.dim, table.vocab.size))
        f.write(table.vectors.astype("<f4").tobytes())
    vocab_sidecar_path(path).write_text(
        "".join(t + "\n" for t in table.vocab.tokens), encoding="utf-8")


def load_table(path) -> EmbeddingTable:
    data = Path(path).read_bytes()
    magic, version, dim, vocab_size = _HEADER.unpack_from(data)
    if magic != TABLE_MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != TABLE_VERSION:
        raise ValueError(f"unsupported version {version}")
    vectors = np.frombuffer(data, dtype="<f4", count=vocab_size * dim,
                            offset=_HEADER.size).reshape(vocab_size, dim)
    tokens = vocab_sidecar_path(path).read_text(encoding="utf-8").splitlines()
    if len(tokens) != vocab_size:
        raise ValueError(f"sidecar has {len(tokens)} tokens, header says {vocab_size}")
    # seed is not part of the wire format; loaded tables carry -1
    return EmbeddingTable(dim=dim, vectors=vectors.copy(), seed=-1, vocab=Vocab(tuple(tokens)))
